//! Piecewise-linear fields, voxel grids, and conversion between them.

use crate::complex::Complex;
use crate::error::{Error, Result};

/// A scalar field on a geometric simplicial complex, linear on each simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct PlField {
    complex: Complex,
    values: Vec<f64>,
}

impl PlField {
    pub fn new(complex: Complex, values: Vec<f64>) -> Result<Self> {
        let dim = complex.ambient_dim();
        if !(1..=3).contains(&dim) {
            return Err(Error::param(format!("ambient dimension must be 1, 2 or 3, got {dim}")));
        }
        if values.len() != complex.num_points() {
            return Err(Error::param(format!(
                "{} values for {} vertices",
                values.len(),
                complex.num_points()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = complex.points().iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i / dim));
        }
        Ok(PlField { complex, values })
    }

    /// Builds a field from flat coordinates, vertex values and an explicit
    /// (closed) simplex list.
    pub fn from_parts<I, S>(dim: usize, points: Vec<f64>, values: Vec<f64>, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u32]>,
    {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::param("coordinate buffer does not match the dimension"));
        }
        PlField::new(Complex::from_simplices(dim, points, simplices)?, values)
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.complex.ambient_dim()
    }

    pub fn num_vertices(&self) -> usize {
        self.values.len()
    }

    /// Same complex, new vertex values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        PlField::new(self.complex.clone(), values)
    }

    /// Axis-aligned bounding box `(lo, hi)` of the vertices.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in self.complex.points().chunks_exact(d) {
            for a in 0..d {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// `(min, max)` of the vertex values.
    pub fn value_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Pointwise mean of fields sharing one complex.
    pub fn average(fields: &[PlField]) -> Result<PlField> {
        let first = fields.first().ok_or_else(|| Error::param("no fields to average"))?;
        if fields.iter().any(|f| f.complex != first.complex) {
            return Err(Error::param("averaged fields must share the same complex"));
        }
        let n = fields.len() as f64;
        let values = (0..first.num_vertices())
            .map(|i| fields.iter().map(|f| f.values[i]).sum::<f64>() / n)
            .collect();
        first.with_values(values)
    }

    pub(crate) fn complex_mut(&mut self) -> &mut Complex {
        &mut self.complex
    }
}

/// Regular grid of samples, `x` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    values: Vec<f64>,
}

impl VoxelGrid {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = dims.len();
        if !(2..=3).contains(&d) || origin.len() != d || spacing.len() != d {
            return Err(Error::param("voxel grids are 2- or 3-dimensional with matching origin and spacing"));
        }
        if dims.contains(&0) {
            return Err(Error::param("grid dimensions must be positive"));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::param("grid spacing must be strictly positive"));
        }
        let n: usize = dims.iter().product();
        if values.len() != n {
            return Err(Error::param(format!("expected {n} values, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(VoxelGrid {
            dims,
            origin,
            spacing,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Linear index of the grid node with integer coordinates `idx`.
    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().rev().zip(self.dims.iter().rev()).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Position of the node with integer coordinates `idx`.
    pub fn position(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.origin)
            .zip(&self.spacing)
            .map(|((&i, &o), &s)| o + s * i as f64)
            .collect()
    }

    /// Zeroes every sample where `mask` is zero. Zero-valued regions drop out
    /// of every superlevel set with a positive threshold.
    pub fn apply_mask(&self, mask: &VoxelGrid) -> Result<VoxelGrid> {
        if mask.dims != self.dims {
            return Err(Error::param("mask dimensions differ from the grid"));
        }
        let values = self
            .values
            .iter()
            .zip(&mask.values)
            .map(|(&v, &m)| if m != 0.0 { v } else { 0.0 })
            .collect();
        VoxelGrid::new(self.dims.clone(), self.origin.clone(), self.spacing.clone(), values)
    }
}

/// Triangulates the grid with the Freudenthal (Kuhn) subdivision: each cell
/// is split into `d!` simplices, one per ordering of the axes, walking from
/// the cell's lowest corner to its highest. Every cell uses the same set of
/// orderings, so faces shared by neighboring cells are split identically.
pub fn voxel_to_pl(grid: &VoxelGrid) -> Result<PlField> {
    let d = grid.dim();
    if grid.dims.iter().any(|&n| n < 2) {
        return Err(Error::param("voxel_to_pl needs at least 2 samples along every axis"));
    }
    let mut points = Vec::with_capacity(grid.len() * d);
    for_each_node(&grid.dims, |idx| points.extend(grid.position(idx)));

    let perms: Vec<Vec<usize>> = if d == 2 {
        vec![vec![0, 1], vec![1, 0]]
    } else {
        vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ]
    };
    let cells: Vec<usize> = grid.dims.iter().map(|&n| n - 1).collect();
    let mut tops: Vec<Vec<u32>> = Vec::new();
    for_each_node(&cells, |base| {
        for perm in &perms {
            let mut corner = base.to_vec();
            let mut simplex = vec![grid.index(&corner) as u32];
            for &axis in perm {
                corner[axis] += 1;
                simplex.push(grid.index(&corner) as u32);
            }
            simplex.sort_unstable();
            tops.push(simplex);
        }
    });
    let complex = Complex::closure_of(d, points, &tops)?;
    PlField::new(complex, grid.values.clone())
}

/// Visits integer grid coordinates with the first axis fastest.
fn for_each_node(dims: &[usize], mut visit: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        visit(&idx);
        let mut a = 0;
        loop {
            if a == dims.len() {
                return;
            }
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// How values are mapped into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    /// `(v - min) / (max - min)` with the field's own range.
    PerField,
    /// `(v - min) / (max - min)` with a range shared by a whole collection,
    /// see [`global_range`].
    Global { min: f64, max: f64 },
}

/// Result of [`normalize_field`].
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub field: PlField,
    /// Set when the value range was empty and every value was mapped to 0.
    pub degenerate: bool,
}

/// Smallest and largest value over a collection of fields.
pub fn global_range<'a>(fields: impl IntoIterator<Item = &'a PlField>) -> (f64, f64) {
    fields.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
        let (a, b) = f.value_range();
        (lo.min(a), hi.max(b))
    })
}

/// Affinely rescales values into `[0, 1]`. With `rescale_geometry`, vertex
/// coordinates are also mapped into `[-1, 1]^d` by centering the bounding
/// box and dividing by its largest half-extent (aspect ratio is preserved).
pub fn normalize_field(f: &PlField, mode: Normalization, rescale_geometry: bool) -> Result<Normalized> {
    if f.num_vertices() == 0 {
        return Err(Error::param("cannot normalize a field without vertices"));
    }
    let (lo, hi) = match mode {
        Normalization::PerField => f.value_range(),
        Normalization::Global { min, max } => {
            let (a, b) = f.value_range();
            if a < min || b > max {
                return Err(Error::param(format!(
                    "field range [{a}, {b}] exceeds the global range [{min}, {max}]"
                )));
            }
            (min, max)
        }
    };
    let degenerate = hi <= lo;
    let values = if degenerate {
        vec![0.0; f.num_vertices()]
    } else {
        let scale = hi - lo;
        f.values.iter().map(|&v| ((v - lo) / scale).clamp(0.0, 1.0)).collect()
    };
    let mut field = f.with_values(values)?;
    if rescale_geometry {
        field = rescale_geometry_of(&field);
    }
    Ok(Normalized { field, degenerate })
}

/// Maps vertex coordinates into `[-1, 1]^d` by centering the bounding box
/// and dividing by its largest half-extent. Values are unchanged.
pub fn rescale_geometry_of(f: &PlField) -> PlField {
    let mut field = f.clone();
    let (blo, bhi) = f.bounding_box();
    let half = blo.iter().zip(&bhi).map(|(a, b)| (b - a) / 2.0).fold(0.0, f64::max);
    if half > 0.0 {
        let center: Vec<f64> = blo.iter().zip(&bhi).map(|(a, b)| (a + b) / 2.0).collect();
        let d = f.dim();
        for p in field.complex_mut().points_mut().chunks_exact_mut(d) {
            for a in 0..d {
                p[a] = (p[a] - center[a]) / half;
            }
        }
    }
    field
}
