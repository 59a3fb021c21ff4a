//! Euler curves and the ECT / LECT / SELECT grids.
//!
//! The Euler characteristic of `K ∩ {x . v ≤ h}` equals the alternating count
//! of simplices whose highest vertex lies at or below `h` (the lower-star
//! rule), so a whole curve costs one pass over the simplices. On a fixed
//! height grid every simplex is assigned the first grid index at or above its
//! top vertex and the curve is a prefix sum of those contributions.

use rayon::prelude::*;

use crate::clip::{check_threshold, level_restrict, superlevel_restrict};
use crate::complex::{dot, Complex, MAX_SIMPLEX_DIM};
use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::field::PlField;
use crate::grid::{TransformGrid, TransformKind};

/// Right-continuous integer step function of height, zero below the first
/// jump.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EulerCurve {
    jumps: Vec<(f64, i64)>,
}

impl EulerCurve {
    /// Builds a curve from `(height, change)` events. Events at equal heights
    /// are merged and net-zero changes dropped.
    pub fn from_events(mut events: Vec<(f64, i64)>) -> Self {
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut jumps: Vec<(f64, i64)> = Vec::new();
        let mut value = 0i64;
        let mut i = 0;
        while i < events.len() {
            let h = events[i].0;
            let mut delta = 0;
            while i < events.len() && events[i].0 == h {
                delta += events[i].1;
                i += 1;
            }
            if delta != 0 {
                value += delta;
                jumps.push((h, value));
            }
        }
        EulerCurve { jumps }
    }

    /// `(height, new value)` pairs, heights strictly increasing.
    pub fn jumps(&self) -> &[(f64, i64)] {
        &self.jumps
    }

    pub fn num_jumps(&self) -> usize {
        self.jumps.len()
    }

    pub fn value_at(&self, h: f64) -> i64 {
        match self.jumps.partition_point(|&(x, _)| x <= h) {
            0 => 0,
            n => self.jumps[n - 1].1,
        }
    }

    pub fn final_value(&self) -> i64 {
        self.jumps.last().map_or(0, |j| j.1)
    }

    pub fn sample(&self, heights: &[f64]) -> Vec<i64> {
        heights.iter().map(|&h| self.value_at(h)).collect()
    }

    /// Whether the curve changes value exactly at `h`.
    pub fn jumps_at(&self, h: f64) -> bool {
        self.jumps.iter().any(|&(x, _)| x == h)
    }
}

/// Exact Euler curve of `K` in direction `v`.
pub fn ect_curve(k: &Complex, v: &[f64]) -> EulerCurve {
    let heights = k.heights(v);
    let mut events = Vec::with_capacity(k.num_simplices());
    for (dim, sign) in (0..=MAX_SIMPLEX_DIM).zip([1i64, -1, 1, -1]) {
        for s in k.simplices(dim) {
            let top = s.iter().map(|&i| heights[i as usize]).fold(f64::NEG_INFINITY, f64::max);
            events.push((top, sign));
        }
    }
    EulerCurve::from_events(events)
}

/// SELECT curve of `f` at threshold `t` in direction `v`.
pub fn euler_scan(f: &PlField, v: &[f64], t: f64) -> Result<EulerCurve> {
    let sup = superlevel_restrict(f, t)?;
    Ok(ect_curve(&sup.complex, v))
}

/// The `(direction, height, threshold)` axes at which a transform is sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRequest {
    pub kind: TransformKind,
    pub directions: DirectionSet,
    pub heights: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl ScanRequest {
    pub fn new(kind: TransformKind, directions: DirectionSet, heights: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        if heights.is_empty() || !heights.windows(2).all(|w| w[0] < w[1]) || heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::param("heights must be non-empty, finite and strictly increasing"));
        }
        match kind {
            TransformKind::Ect => {
                if !thresholds.is_empty() {
                    return Err(Error::param("ECT requests take no thresholds"));
                }
            }
            _ => {
                if thresholds.is_empty() || !thresholds.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::param("thresholds must be non-empty and strictly increasing"));
                }
                for &t in &thresholds {
                    check_threshold(t)?;
                }
            }
        }
        Ok(ScanRequest {
            kind,
            directions,
            heights,
            thresholds,
        })
    }

    pub fn select(directions: DirectionSet, heights: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        ScanRequest::new(TransformKind::Select, directions, heights, thresholds)
    }

    pub fn lect(directions: DirectionSet, heights: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        ScanRequest::new(TransformKind::Lect, directions, heights, thresholds)
    }

    pub fn ect(directions: DirectionSet, heights: Vec<f64>) -> Result<Self> {
        ScanRequest::new(TransformKind::Ect, directions, heights, Vec::new())
    }
}

/// `n` uniformly spaced thresholds `k/n`, `k = 1..=n`.
pub fn default_thresholds(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}

/// Largest `|x . v|` over the points of the complexes and the directions.
pub fn scan_radius<'a>(complexes: impl IntoIterator<Item = &'a Complex>, directions: &DirectionSet) -> f64 {
    let mut r: f64 = 0.0;
    for k in complexes {
        for v in directions.iter() {
            for h in k.heights(v) {
                r = r.max(h.abs());
            }
        }
    }
    r
}

/// `n` uniform heights covering `[-radius, radius]` with one grid step of
/// margin on each side (`n ≥ 4`), so that the first sample precedes every
/// vertex and the last one follows every vertex. Fewer than 4 heights span
/// `[-radius, radius]` exactly.
pub fn uniform_heights(radius: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("at least one height is required"));
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::param(format!("invalid scan radius {radius}")));
    }
    let r = if radius > 0.0 { radius } else { 1.0 };
    Ok(match n {
        1 => vec![r],
        2 | 3 => {
            let step = 2.0 * r / (n - 1) as f64;
            (0..n).map(|j| -r + step * j as f64).collect()
        }
        _ => {
            let step = 2.0 * r / (n - 3) as f64;
            (0..n).map(|j| -r - step + step * j as f64).collect()
        }
    })
}

/// Euler curves of every complex in every direction, sampled at `heights`.
/// `complexes[k]` fills threshold slot `k`.
pub(crate) fn scan_complexes(complexes: &[&Complex], directions: &DirectionSet, heights: &[f64]) -> Vec<i32> {
    let nh = heights.len();
    let nt = complexes.len();
    let mut values = vec![0i32; directions.len() * nh * nt];
    if nt == 0 {
        return values;
    }
    values.par_chunks_mut(nh * nt).enumerate().for_each(|(i, block)| {
        let v = directions.get(i);
        let mut diff = vec![0i64; nh + 1];
        let mut bins: Vec<u32> = Vec::new();
        for (k, c) in complexes.iter().enumerate() {
            let d = c.ambient_dim();
            bins.clear();
            bins.extend(c.points().chunks_exact(d).map(|p| {
                let h = dot(p, v);
                heights.partition_point(|&x| x < h) as u32
            }));
            diff.fill(0);
            for (dim, sign) in (0..=MAX_SIMPLEX_DIM).zip([1i64, -1, 1, -1]) {
                for s in c.flat_cells(dim).chunks_exact(dim + 1) {
                    let b = s.iter().map(|&u| bins[u as usize]).max().unwrap_or(0);
                    diff[b as usize] += sign;
                }
            }
            let mut acc = 0i64;
            for j in 0..nh {
                acc += diff[j];
                block[j * nt + k] = acc as i32;
            }
        }
    });
    values
}

fn check_request(dim: usize, req: &ScanRequest, kind: TransformKind) -> Result<()> {
    if req.kind != kind {
        return Err(Error::param(format!("request is for {}, not {}", req.kind.name(), kind.name())));
    }
    if req.directions.dim() != dim {
        return Err(Error::param(format!(
            "directions are {}-dimensional but the field lives in dimension {dim}",
            req.directions.dim()
        )));
    }
    Ok(())
}

/// `SELECT(f)(v, h, t) = χ({x . v ≤ h, f(x) ≥ t})` on the request grid.
/// Each superlevel complex is built once and scanned in every direction.
pub fn select_transform(f: &PlField, req: &ScanRequest) -> Result<TransformGrid> {
    check_request(f.dim(), req, TransformKind::Select)?;
    let clipped = req
        .thresholds
        .par_iter()
        .map(|&t| superlevel_restrict(f, t))
        .collect::<Result<Vec<_>>>()?;
    let complexes: Vec<&Complex> = clipped.iter().map(|c| &c.complex).collect();
    let values = scan_complexes(&complexes, &req.directions, &req.heights);
    TransformGrid::new(TransformKind::Select, req.directions.clone(), req.heights.clone(), req.thresholds.clone(), values)
}

/// `LECT(f)(v, h, t) = χ({x . v ≤ h, f(x) = t})` on the request grid.
pub fn lect_transform(f: &PlField, req: &ScanRequest) -> Result<TransformGrid> {
    check_request(f.dim(), req, TransformKind::Lect)?;
    let clipped = req
        .thresholds
        .par_iter()
        .map(|&t| level_restrict(f, t))
        .collect::<Result<Vec<_>>>()?;
    let complexes: Vec<&Complex> = clipped.iter().map(|c| &c.complex).collect();
    let values = scan_complexes(&complexes, &req.directions, &req.heights);
    TransformGrid::new(TransformKind::Lect, req.directions.clone(), req.heights.clone(), req.thresholds.clone(), values)
}

/// Euler characteristic transform of a complex on the request grid.
pub fn ect_transform(k: &Complex, req: &ScanRequest) -> Result<TransformGrid> {
    check_request(k.ambient_dim(), req, TransformKind::Ect)?;
    let values = scan_complexes(&[k], &req.directions, &req.heights);
    TransformGrid::new(TransformKind::Ect, req.directions.clone(), req.heights.clone(), Vec::new(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::make_directions;

    fn segment(a: f64, b: f64) -> PlField {
        PlField::from_parts(2, vec![0.0, 0.0, 1.0, 0.0], vec![a, b], [vec![0u32], vec![1], vec![0, 1]]).unwrap()
    }

    #[test]
    fn point_curve() {
        let k = Complex::from_simplices(2, vec![0.3, -0.2], [[0u32]]).unwrap();
        let c = ect_curve(&k, &[0.0, 1.0]);
        assert_eq!(c.jumps(), &[(-0.2, 1)]);
        assert_eq!(c.value_at(-0.3), 0);
        assert_eq!(c.value_at(-0.2), 1);
    }

    #[test]
    fn tetra_boundary_curve_ends_at_two() {
        let pts = vec![0., 0., 0., 1., 0., 0., 0., 1., 0., 0., 0., 1.];
        let k = Complex::closure_of(3, pts, [[0u32, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap();
        let v = [0.267, 0.534, 0.802];
        let n = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        let c = ect_curve(&k, &v.map(|x| x / n));
        assert_eq!(c.jumps()[0].1, 1);
        assert_eq!(c.final_value(), 2);
    }

    #[test]
    fn equal_heights_merge() {
        let k = Complex::from_simplices(2, vec![0.0, 0.0, 0.0, 1.0], [[0u32], [1]]).unwrap();
        let c = ect_curve(&k, &[1.0, 0.0]);
        assert_eq!(c.jumps(), &[(0.0, 2)]);
    }

    #[test]
    fn heights_axis() {
        let h = uniform_heights(1.0, 5).unwrap();
        assert_eq!(h, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(uniform_heights(2.0, 3).unwrap(), vec![-2.0, 0.0, 2.0]);
        assert_eq!(default_thresholds(4), vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn segment_select_and_lect() {
        let f = segment(0.0, 1.0);
        let dirs = make_directions(2, 4).unwrap();
        let heights = uniform_heights(1.0, 7).unwrap();
        let sel = select_transform(&f, &ScanRequest::select(dirs.clone(), heights.clone(), vec![0.5, 1.0]).unwrap()).unwrap();
        // direction (1,0): superlevel segment [0.5,1] enters at h = 0.5
        assert_eq!(sel.curve(0, 0), heights.iter().map(|&h| (h >= 0.5) as i32).collect::<Vec<_>>());
        let lect = lect_transform(&f, &ScanRequest::lect(dirs, heights.clone(), vec![0.5]).unwrap()).unwrap();
        assert_eq!(lect.curve(0, 0), sel.curve(0, 0));
        for i in 0..4 {
            assert_eq!(sel.get(i, heights.len() - 1, 0), 1);
            assert_eq!(sel.get(i, heights.len() - 1, 1), 1);
        }
    }

    #[test]
    fn constant_field_matches_ect() {
        let f = segment(1.0, 1.0);
        let dirs = make_directions(2, 8).unwrap();
        let heights = uniform_heights(1.0, 9).unwrap();
        let sel = select_transform(&f, &ScanRequest::select(dirs.clone(), heights.clone(), default_thresholds(3)).unwrap()).unwrap();
        let ect = ect_transform(f.complex(), &ScanRequest::ect(dirs, heights).unwrap()).unwrap();
        for i in 0..8 {
            for k in 0..3 {
                assert_eq!(sel.curve(i, k), ect.curve(i, 0));
            }
        }
    }

    #[test]
    fn scan_matches_grid_slice() {
        let f = segment(0.2, 0.9);
        let dirs = make_directions(2, 6).unwrap();
        let heights = uniform_heights(1.0, 11).unwrap();
        let grid = select_transform(&f, &ScanRequest::select(dirs.clone(), heights.clone(), vec![0.5]).unwrap()).unwrap();
        for (i, v) in dirs.iter().enumerate() {
            let scan = euler_scan(&f, v, 0.5).unwrap();
            let sampled: Vec<i32> = scan.sample(&heights).into_iter().map(|x| x as i32).collect();
            assert_eq!(sampled, grid.curve(i, 0));
        }
    }

    #[test]
    fn request_validation() {
        let dirs = make_directions(2, 4).unwrap();
        assert!(ScanRequest::select(dirs.clone(), vec![0.0], vec![0.0]).is_err());
        assert!(ScanRequest::select(dirs.clone(), vec![0.0], vec![0.5, 0.4]).is_err());
        assert!(ScanRequest::select(dirs, vec![], vec![0.5]).is_err());
        let f3 = PlField::from_parts(3, vec![0.0; 3], vec![1.0], [[0u32]]).unwrap();
        let req = ScanRequest::select(make_directions(2, 4).unwrap(), vec![0.0], vec![1.0]).unwrap();
        assert!(select_transform(&f3, &req).is_err());
    }
}
