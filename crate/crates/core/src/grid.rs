//! Dense (direction, height, threshold) arrays of transform values.

use crate::directions::DirectionSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Select,
    Lect,
    /// Plain Euler characteristic transform of a complex; the threshold axis
    /// is empty.
    Ect,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Select => "SELECT",
            TransformKind::Lect => "LECT",
            TransformKind::Ect => "ECT",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "SELECT" => Some(TransformKind::Select),
            "LECT" => Some(TransformKind::Lect),
            "ECT" => Some(TransformKind::Ect),
            _ => None,
        }
    }
}

/// Transform values stored at index `(i * n_heights + j) * n_thresholds + k`
/// for direction `i`, height `j` and threshold `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformGrid {
    pub(crate) kind: TransformKind,
    pub(crate) directions: DirectionSet,
    pub(crate) heights: Vec<f64>,
    pub(crate) thresholds: Vec<f64>,
    pub(crate) values: Vec<i32>,
}

impl TransformGrid {
    pub fn new(
        kind: TransformKind,
        directions: DirectionSet,
        heights: Vec<f64>,
        thresholds: Vec<f64>,
        values: Vec<i32>,
    ) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::param("empty height axis"));
        }
        if !is_sorted(&heights) || !is_sorted(&thresholds) {
            return Err(Error::param("height and threshold axes must be strictly increasing"));
        }
        match kind {
            TransformKind::Ect if !thresholds.is_empty() => {
                return Err(Error::param("ECT grids have no threshold axis"));
            }
            TransformKind::Select | TransformKind::Lect if thresholds.is_empty() => {
                return Err(Error::param("empty threshold axis"));
            }
            _ => {}
        }
        let grid = TransformGrid {
            kind,
            directions,
            heights,
            thresholds,
            values,
        };
        let expected = grid.directions.len() * grid.heights.len() * grid.n_thresholds();
        if grid.values.len() != expected {
            return Err(Error::param(format!("expected {expected} values, got {}", grid.values.len())));
        }
        Ok(grid)
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn n_directions(&self) -> usize {
        self.directions.len()
    }

    pub fn n_heights(&self) -> usize {
        self.heights.len()
    }

    /// Length of the threshold axis as stored: 1 for ECT grids.
    pub fn n_thresholds(&self) -> usize {
        self.thresholds.len().max(1)
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_heights() + j) * self.n_thresholds() + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> i32 {
        self.values[self.index(i, j, k)]
    }

    /// Euler curve of direction `i` and threshold `k` over the height axis.
    pub fn curve(&self, i: usize, k: usize) -> Vec<i32> {
        (0..self.n_heights()).map(|j| self.get(i, j, k)).collect()
    }

    /// Checks that both grids have the same kind and bit-identical axes.
    pub fn check_same_axes(&self, other: &TransformGrid) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::AxisMismatch(format!("{} vs {}", self.kind.name(), other.kind.name())));
        }
        if self.directions.as_flat() != other.directions.as_flat() || self.directions.dim() != other.directions.dim() {
            return Err(Error::AxisMismatch("direction sets differ".into()));
        }
        if self.heights != other.heights {
            return Err(Error::AxisMismatch("height axes differ".into()));
        }
        if self.thresholds != other.thresholds {
            return Err(Error::AxisMismatch("threshold axes differ".into()));
        }
        Ok(())
    }

    /// Grid whose direction `i` carries the data of direction `perm[i]`.
    /// The direction axis itself is left unchanged.
    pub fn permute_directions(&self, perm: &[usize]) -> Result<TransformGrid> {
        let n = self.n_directions();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::param("not a permutation of the direction axis"));
        }
        let block = self.n_heights() * self.n_thresholds();
        let mut values = Vec::with_capacity(self.values.len());
        for &p in perm {
            values.extend_from_slice(&self.values[p * block..(p + 1) * block]);
        }
        Ok(TransformGrid {
            values,
            ..self.clone()
        })
    }

    /// Cyclic shift: direction `i` of the result carries direction `(i + j) mod n`.
    pub fn shift_directions(&self, j: usize) -> TransformGrid {
        let n = self.n_directions();
        let perm: Vec<usize> = (0..n).map(|i| (i + j) % n).collect();
        self.permute_directions(&perm).expect("cyclic shift is a permutation")
    }
}

fn is_sorted(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1]) && xs.iter().all(|x| x.is_finite())
}
