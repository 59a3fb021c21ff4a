//! Finite geometric simplicial complexes and their Euler characteristic.
//!
//! A [`Complex`] stores a point cloud in `R^d` and a list of simplices over
//! those points. Simplices are kept grouped by dimension in flat index
//! buffers, which keeps the hot loops of the Euler-curve scans cache-friendly.
//! Each simplex is a sorted tuple of distinct vertex indices; dimensions up to
//! three are supported.

use std::collections::HashSet;

use crate::cf::ConstructibleFunction;
use crate::error::{Error, Result};

/// Largest simplex dimension handled by the library.
pub const MAX_SIMPLEX_DIM: usize = 3;

/// Simplex vertex tuple padded with `u32::MAX`, used as a hash key.
pub(crate) type SimplexKey = [u32; MAX_SIMPLEX_DIM + 1];

pub(crate) fn simplex_key(s: &[u32]) -> SimplexKey {
    let mut key = [u32::MAX; MAX_SIMPLEX_DIM + 1];
    key[..s.len()].copy_from_slice(s);
    key
}

#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    dim: usize,
    points: Vec<f64>,
    cells: Vec<Vec<u32>>,
}

impl Complex {
    /// An empty complex over the given points (flat, `dim` coordinates each).
    pub fn new(dim: usize, points: Vec<f64>) -> Self {
        assert!(dim > 0 && points.len().is_multiple_of(dim), "point buffer length must be a multiple of dim");
        Complex {
            dim,
            points,
            cells: vec![Vec::new(); MAX_SIMPLEX_DIM + 1],
        }
    }

    /// Builds a complex from an explicit simplex list and verifies that it is
    /// closed under taking faces.
    pub fn from_simplices<I, S>(dim: usize, points: Vec<f64>, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u32]>,
    {
        let mut complex = Complex::new(dim, points);
        let mut seen: HashSet<SimplexKey> = HashSet::new();
        for s in simplices {
            let s = s.as_ref();
            complex.try_push(s)?;
            if !seen.insert(simplex_key(s)) {
                return Err(Error::InvalidSimplex {
                    simplex: s.to_vec(),
                    msg: "listed twice".into(),
                });
            }
        }
        complex.check_closed()?;
        Ok(complex)
    }

    /// Builds the smallest closed complex containing the given simplices.
    pub fn closure_of<I, S>(dim: usize, points: Vec<f64>, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u32]>,
    {
        let mut seen: HashSet<SimplexKey> = HashSet::new();
        let mut faces: Vec<Vec<u32>> = Vec::new();
        let nv = points.len() / dim;
        for s in simplices {
            let s = validate_simplex(s.as_ref(), nv)?;
            let m = s.len();
            for mask in 1u32..(1 << m) {
                let face: Vec<u32> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
                if seen.insert(simplex_key(&face)) {
                    faces.push(face);
                }
            }
        }
        faces.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut complex = Complex::new(dim, points);
        for f in &faces {
            complex.push_sorted(f);
        }
        Ok(complex)
    }

    fn try_push(&mut self, s: &[u32]) -> Result<()> {
        let s = validate_simplex(s, self.num_points())?;
        self.push_sorted(&s);
        Ok(())
    }

    /// Appends a simplex whose indices are already sorted and distinct.
    pub(crate) fn push_sorted(&mut self, s: &[u32]) {
        debug_assert!(s.windows(2).all(|w| w[0] < w[1]));
        self.cells[s.len() - 1].extend_from_slice(s);
    }

    /// Verifies that every facet of every simplex is present.
    pub fn check_closed(&self) -> Result<()> {
        let mut present: HashSet<SimplexKey> = HashSet::with_capacity(self.num_simplices());
        for s in self.iter() {
            present.insert(simplex_key(s));
        }
        for s in self.iter().filter(|s| s.len() > 1) {
            for skip in 0..s.len() {
                let face: Vec<u32> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                if !present.contains(&simplex_key(&face)) {
                    return Err(Error::NotClosed {
                        simplex: s.to_vec(),
                        face,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub(crate) fn points_mut(&mut self) -> &mut [f64] {
        &mut self.points
    }

    /// Simplices of dimension `k`, each as a sorted index slice.
    pub fn simplices(&self, k: usize) -> impl Iterator<Item = &[u32]> + '_ {
        self.cells
            .get(k)
            .map(|c| c.as_slice())
            .unwrap_or(&[])
            .chunks_exact(k + 1)
    }

    /// All simplices, in increasing dimension.
    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..=MAX_SIMPLEX_DIM).flat_map(move |k| self.simplices(k))
    }

    pub(crate) fn flat_cells(&self, k: usize) -> &[u32] {
        &self.cells[k]
    }

    pub fn count(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, |c| c.len() / (k + 1))
    }

    /// f-vector `(f_0, ..., f_3)`.
    pub fn f_vector(&self) -> [usize; MAX_SIMPLEX_DIM + 1] {
        std::array::from_fn(|k| self.count(k))
    }

    pub fn num_simplices(&self) -> usize {
        (0..=MAX_SIMPLEX_DIM).map(|k| self.count(k)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_simplices() == 0
    }

    /// Highest dimension with at least one simplex, `None` for the empty complex.
    pub fn top_dim(&self) -> Option<usize> {
        (0..=MAX_SIMPLEX_DIM).rev().find(|&k| self.count(k) > 0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        euler_characteristic(self)
    }

    /// Height `x . v` of every point.
    pub fn heights(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        self.points.chunks_exact(self.dim).map(|p| dot(p, v)).collect()
    }

    /// Subcomplex made of the simplices accepted by `keep`. The caller is
    /// responsible for `keep` selecting a closed family.
    pub fn filter<F: FnMut(&[u32]) -> bool>(&self, mut keep: F) -> Complex {
        let mut out = Complex::new(self.dim, self.points.clone());
        for s in self.iter() {
            if keep(s) {
                out.push_sorted(s);
            }
        }
        out
    }
}

fn validate_simplex(s: &[u32], num_points: usize) -> Result<Vec<u32>> {
    if s.is_empty() || s.len() > MAX_SIMPLEX_DIM + 1 {
        return Err(Error::InvalidSimplex {
            simplex: s.to_vec(),
            msg: format!("expected 1..={} vertices", MAX_SIMPLEX_DIM + 1),
        });
    }
    if let Some(&bad) = s.iter().find(|&&v| v as usize >= num_points) {
        return Err(Error::InvalidSimplex {
            simplex: s.to_vec(),
            msg: format!("vertex index {bad} out of range"),
        });
    }
    if !s.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidSimplex {
            simplex: s.to_vec(),
            msg: "vertex indices must be distinct and sorted ascending".into(),
        });
    }
    Ok(s.to_vec())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Alternating simplex count `sum (-1)^dim`; zero for the empty complex.
pub fn euler_characteristic(k: &Complex) -> i64 {
    (0..=MAX_SIMPLEX_DIM)
        .map(|d| if d % 2 == 0 { k.count(d) as i64 } else { -(k.count(d) as i64) })
        .sum()
}

/// Euler integral `sum_n n * chi(phi^{-1}(n))`.
///
/// The level sets of a constructible function on a cell domain are unions of
/// open cells, so the integral reduces to `sum_cells phi(c) * (-1)^dim(c)`.
pub fn euler_integral(phi: &ConstructibleFunction) -> i64 {
    phi.domain()
        .iter()
        .zip(phi.values())
        .map(|(&dim, &val)| if dim % 2 == 0 { val } else { -val })
        .sum()
}
