//! Distances between transform grids, marginal and weighted Euler curves,
//! and alignment under the action of the orthogonal group.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::complex::{simplex_key, Complex, SimplexKey, MAX_SIMPLEX_DIM};
use crate::directions::{circle_point, DirectionSet, Scheme};
use crate::error::{Error, Result};
use crate::field::PlField;
use crate::grid::{TransformGrid, TransformKind};
use crate::transform::{scan_complexes, ScanRequest};

/// Quadrature over the threshold axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ThresholdRule {
    /// Trapezoid rule on `[0, t_1, ..., t_K]`, the value on `[0, t_1]`
    /// taken equal to the `t_1` slice.
    #[default]
    Trapezoid,
    /// Right-endpoint rule: `t_k` stands for `(t_{k-1}, t_k]`, `t_0 = 0`.
    /// Exact for fields whose values all appear among the thresholds.
    Step,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceOptions {
    pub p: f64,
    pub rule: ThresholdRule,
    /// Divide by `(height range * t_max)^(1/p)`, making the distance an
    /// average over the sampled box rather than an integral.
    pub normalized: bool,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            p: 2.0,
            rule: ThresholdRule::Trapezoid,
            normalized: false,
        }
    }
}

fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
            (left + right) / 2.0
        })
        .collect()
}

fn threshold_weights(ts: &[f64], rule: ThresholdRule) -> Vec<f64> {
    if ts.is_empty() {
        return vec![1.0];
    }
    match rule {
        ThresholdRule::Step => (0..ts.len()).map(|k| ts[k] - if k > 0 { ts[k - 1] } else { 0.0 }).collect(),
        ThresholdRule::Trapezoid => {
            let mut w = if ts.len() == 1 { vec![0.0] } else { trapezoid_weights(ts) };
            w[0] += ts[0];
            w
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("p must be a finite number >= 1, got {p}")))
    }
}

/// `p`-distance between two grids with the default options.
pub fn select_distance(a: &TransformGrid, b: &TransformGrid, p: f64) -> Result<f64> {
    select_distance_with(
        a,
        b,
        &DistanceOptions {
            p,
            ..DistanceOptions::default()
        },
    )
}

/// `(∫∫∫ |A - B|^p dt dh dv)^(1/p)` by quadrature: mean over directions,
/// trapezoid over heights, and `opts.rule` over thresholds.
pub fn select_distance_with(a: &TransformGrid, b: &TransformGrid, opts: &DistanceOptions) -> Result<f64> {
    a.check_same_axes(b)?;
    check_p(opts.p)?;
    let q = Quadrature::new(a, opts);
    Ok(q.finish(q.shifted_sum(a, b, 0)))
}

/// Distance between two real-valued arrays laid out on the axes of `axes`,
/// such as averages of several transform grids.
pub fn real_grid_distance(axes: &TransformGrid, a: &[f64], b: &[f64], opts: &DistanceOptions) -> Result<f64> {
    check_p(opts.p)?;
    let len = axes.values().len();
    if a.len() != len || b.len() != len {
        return Err(Error::AxisMismatch(format!("arrays of length {} and {} for a grid of {len}", a.len(), b.len())));
    }
    let q = Quadrature::new(axes, opts);
    let nt = axes.n_thresholds();
    let mut total = 0.0;
    for (idx, (x, y)) in a.iter().zip(b).enumerate() {
        let diff = (x - y).abs();
        if diff != 0.0 {
            let jk = idx % (axes.n_heights() * nt);
            total += q.wh[jk / nt] * q.wt[jk % nt] * diff.powf(q.p);
        }
    }
    Ok(q.finish(total))
}

/// Entrywise mean of grids sharing the same axes.
pub fn mean_grid(grids: &[&TransformGrid]) -> Result<Vec<f64>> {
    let first = grids.first().ok_or_else(|| Error::param("mean of zero grids"))?;
    let mut acc = vec![0.0; first.values().len()];
    for g in grids {
        first.check_same_axes(g)?;
        for (s, &v) in acc.iter_mut().zip(g.values()) {
            *s += v as f64;
        }
    }
    let n = grids.len() as f64;
    acc.iter_mut().for_each(|s| *s /= n);
    Ok(acc)
}

struct Quadrature {
    wh: Vec<f64>,
    wt: Vec<f64>,
    p: f64,
    scale: f64,
}

impl Quadrature {
    fn new(g: &TransformGrid, opts: &DistanceOptions) -> Self {
        let wh = trapezoid_weights(g.heights());
        let wt = threshold_weights(g.thresholds(), opts.rule);
        let mut scale = 1.0 / g.n_directions() as f64;
        if opts.normalized {
            let h = g.heights();
            let range = h[h.len() - 1] - h[0];
            let t_max = g.thresholds().last().copied().unwrap_or(1.0);
            let measure = if range > 0.0 { range } else { 1.0 } * t_max;
            scale /= measure;
        }
        Quadrature { wh, wt, p: opts.p, scale }
    }

    /// `Σ_i Σ_j Σ_k w_j w_k |A[i] - B[(i + shift) mod n]|^p`.
    fn shifted_sum(&self, a: &TransformGrid, b: &TransformGrid, shift: usize) -> f64 {
        let n = a.n_directions();
        let block = a.n_heights() * a.n_thresholds();
        let nt = a.n_thresholds();
        let mut total = 0.0;
        for i in 0..n {
            let ia = &a.values()[i * block..(i + 1) * block];
            let ib_dir = (i + shift) % n;
            let ib = &b.values()[ib_dir * block..(ib_dir + 1) * block];
            for (j, wh) in self.wh.iter().enumerate() {
                for (k, wt) in self.wt.iter().enumerate() {
                    let diff = (ia[j * nt + k] - ib[j * nt + k]).unsigned_abs();
                    if diff != 0 {
                        total += wh * wt * (diff as f64).powf(self.p);
                    }
                }
            }
        }
        total
    }

    fn finish(&self, sum: f64) -> f64 {
        (sum * self.scale).powf(1.0 / self.p)
    }
}

/// Threshold-integrated SELECT curves `M_v(h) = ∫ SELECT(v, h, t) dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalCurveSet {
    pub directions: DirectionSet,
    pub heights: Vec<f64>,
    /// Indexed `i * n_heights + j`.
    pub values: Vec<f64>,
}

impl MarginalCurveSet {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.heights.len() + j]
    }

    pub fn curve(&self, i: usize) -> &[f64] {
        let nh = self.heights.len();
        &self.values[i * nh..(i + 1) * nh]
    }
}

/// Marginal Euler curves of a SELECT grid, integrating over `[0, t_max]`
/// with the right-endpoint rule: SELECT is constant in `t` between
/// consecutive field values, so the rule is exact as soon as every field
/// value is a threshold.
pub fn marginal_curves(g: &TransformGrid) -> Result<MarginalCurveSet> {
    if g.kind() != TransformKind::Select {
        return Err(Error::param("marginal curves are defined for SELECT grids"));
    }
    let wt = threshold_weights(g.thresholds(), ThresholdRule::Step);
    let nt = g.n_thresholds();
    let values = g
        .values()
        .chunks_exact(nt)
        .map(|row| row.iter().zip(&wt).map(|(&v, w)| v as f64 * w).sum())
        .collect();
    Ok(MarginalCurveSet {
        directions: g.directions().clone(),
        heights: g.heights().to_vec(),
        values,
    })
}

/// `p`-distance between marginal curve sets: mean over directions and
/// trapezoid over heights.
pub fn marginal_distance(a: &MarginalCurveSet, b: &MarginalCurveSet, p: f64) -> Result<f64> {
    check_p(p)?;
    if a.directions != b.directions || a.heights != b.heights {
        return Err(Error::AxisMismatch("marginal curve sets are sampled on different axes".into()));
    }
    let wh = trapezoid_weights(&a.heights);
    let nh = a.heights.len();
    let n = a.directions.len();
    let mut total = 0.0;
    for i in 0..n {
        for (j, w) in wh.iter().enumerate() {
            total += w * (a.values[i * nh + j] - b.values[i * nh + j]).abs().powf(p);
        }
    }
    Ok((total / n as f64).powf(1.0 / p))
}

/// A complex with one weight per simplex (in [`Complex::iter`] order),
/// admissible in the sense that every simplex with cofaces carries the
/// largest weight among them.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedComplex {
    complex: Complex,
    weights: Vec<f64>,
}

impl WeightedComplex {
    pub fn new(complex: Complex, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != complex.num_simplices() {
            return Err(Error::param(format!(
                "{} weights for {} simplices",
                weights.len(),
                complex.num_simplices()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::param(format!("weight {i} is not finite")));
        }
        let cofacet_max = cofacet_maxima(&complex, &weights);
        for ((s, &w), m) in complex.iter().zip(&weights).zip(&cofacet_max) {
            if let Some(m) = *m {
                if w != m {
                    return Err(Error::Inadmissible {
                        simplex: s.to_vec(),
                        expected: m,
                        found: w,
                    });
                }
            }
        }
        Ok(WeightedComplex { complex, weights })
    }

    /// Weights the maximal simplices with `top` and every other simplex with
    /// the largest weight of its cofaces.
    pub fn from_maximal(complex: Complex, mut top: impl FnMut(&[u32]) -> f64) -> Self {
        let index = simplex_index(&complex);
        let mut weights = vec![f64::NEG_INFINITY; complex.num_simplices()];
        let offsets = dim_offsets(&complex);
        for dim in (0..=MAX_SIMPLEX_DIM).rev() {
            for (n, s) in complex.simplices(dim).enumerate() {
                let i = offsets[dim] + n;
                if weights[i] == f64::NEG_INFINITY {
                    weights[i] = top(s);
                }
                for skip in 0..s.len() {
                    if s.len() == 1 {
                        break;
                    }
                    let face: Vec<u32> = s.iter().enumerate().filter(|&(m, _)| m != skip).map(|(_, &v)| v).collect();
                    let fi = index[&simplex_key(&face)];
                    weights[fi] = weights[fi].max(weights[i]);
                }
            }
        }
        WeightedComplex { complex, weights }
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The subcomplex `{σ : g(σ) ≥ t}`, closed because weights decrease
    /// towards cofaces.
    pub fn superlevel(&self, t: f64) -> Complex {
        let mut w = self.weights.iter();
        self.complex.filter(|_| *w.next().expect("one weight per simplex") >= t)
    }

    /// Sorted distinct weights.
    pub fn weight_values(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

fn dim_offsets(k: &Complex) -> [usize; MAX_SIMPLEX_DIM + 2] {
    let mut off = [0; MAX_SIMPLEX_DIM + 2];
    for d in 0..=MAX_SIMPLEX_DIM {
        off[d + 1] = off[d] + k.count(d);
    }
    off
}

fn simplex_index(k: &Complex) -> HashMap<SimplexKey, usize> {
    k.iter().enumerate().map(|(i, s)| (simplex_key(s), i)).collect()
}

fn cofacet_maxima(k: &Complex, weights: &[f64]) -> Vec<Option<f64>> {
    let index = simplex_index(k);
    let mut out: Vec<Option<f64>> = vec![None; weights.len()];
    for (i, s) in k.iter().enumerate().filter(|(_, s)| s.len() > 1) {
        for skip in 0..s.len() {
            let face: Vec<u32> = s.iter().enumerate().filter(|&(m, _)| m != skip).map(|(_, &v)| v).collect();
            let fi = index[&simplex_key(&face)];
            out[fi] = Some(out[fi].map_or(weights[i], |m: f64| m.max(weights[i])));
        }
    }
    out
}

/// Right-continuous real step function of height.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedCurve {
    jumps: Vec<(f64, f64)>,
}

impl WeightedCurve {
    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn value_at(&self, h: f64) -> f64 {
        match self.jumps.partition_point(|&(x, _)| x <= h) {
            0 => 0.0,
            n => self.jumps[n - 1].1,
        }
    }

    pub fn sample(&self, heights: &[f64]) -> Vec<f64> {
        heights.iter().map(|&h| self.value_at(h)).collect()
    }
}

/// `h ↦ Σ (-1)^dim σ g(σ)` over the simplices whose top vertex has height
/// at most `h` in direction `v`.
pub fn weighted_euler_curve(wc: &WeightedComplex, v: &[f64]) -> WeightedCurve {
    let heights = wc.complex.heights(v);
    let mut events: Vec<(f64, f64)> = wc
        .complex
        .iter()
        .zip(&wc.weights)
        .map(|(s, &w)| {
            let top = s.iter().map(|&i| heights[i as usize]).fold(f64::NEG_INFINITY, f64::max);
            (top, if s.len() % 2 == 1 { w } else { -w })
        })
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut jumps: Vec<(f64, f64)> = Vec::new();
    let mut value = 0.0;
    let mut i = 0;
    while i < events.len() {
        let h = events[i].0;
        let before = value;
        while i < events.len() && events[i].0 == h {
            value += events[i].1;
            i += 1;
        }
        if value != before {
            jumps.push((h, value));
        }
    }
    WeightedCurve { jumps }
}

/// SELECT of the step field equal to `g(σ)` on each open simplex: the
/// superlevel set at `t` is the subcomplex `{g ≥ t}`.
pub fn weighted_select_transform(wc: &WeightedComplex, req: &ScanRequest) -> Result<TransformGrid> {
    if req.kind != TransformKind::Select {
        return Err(Error::param("weighted transforms are SELECT transforms"));
    }
    if req.directions.dim() != wc.complex.ambient_dim() {
        return Err(Error::param("direction dimension does not match the complex"));
    }
    let levels: Vec<Complex> = req.thresholds.iter().map(|&t| wc.superlevel(t)).collect();
    let refs: Vec<&Complex> = levels.iter().collect();
    let values = scan_complexes(&refs, &req.directions, &req.heights);
    TransformGrid::new(TransformKind::Select, req.directions.clone(), req.heights.clone(), req.thresholds.clone(), values)
}

/// Result of [`align_2d`].
#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    /// Best cyclic shift `j`: direction `i` of `A` is matched with direction
    /// `i + j` of `B`.
    pub shift: usize,
    pub distance: f64,
    /// Distance for every shift `0..n`.
    pub profile: Vec<f64>,
}

/// Exhaustive search over cyclic shifts of the direction axis. If `B` is the
/// transform of `A`'s field rotated by `2πj₀/n`, the minimum is at `j₀`.
/// Ties go to the smallest shift.
pub fn align_2d(a: &TransformGrid, b: &TransformGrid, p: f64) -> Result<Alignment> {
    a.check_same_axes(b)?;
    check_p(p)?;
    if a.directions().scheme() != Scheme::UniformCircle {
        return Err(Error::param("alignment needs uniform circle direction sets"));
    }
    let opts = DistanceOptions {
        p,
        ..DistanceOptions::default()
    };
    let q = Quadrature::new(a, &opts);
    let profile: Vec<f64> = (0..a.n_directions())
        .into_par_iter()
        .map(|j| q.finish(q.shifted_sum(a, b, j)))
        .collect();
    let (shift, distance) = profile
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (j, d)| if d < best.1 { (j, d) } else { best });
    Ok(Alignment {
        shift,
        distance,
        profile,
    })
}

/// Pushes a field forward along the orthogonal map `r` (row-major `d x d`):
/// vertex `x` moves to `r x`, values are unchanged.
pub fn rotate_field(f: &PlField, r: &[f64]) -> Result<PlField> {
    let d = f.dim();
    if r.len() != d * d {
        return Err(Error::param(format!("expected a {d}x{d} matrix")));
    }
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let dotp: f64 = (0..d).map(|k| r[i * d + k] * r[j * d + k]).sum();
            dev = dev.max((dotp - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    if dev > 1e-12 {
        return Err(Error::NotOrthogonal(dev));
    }
    let mut points = Vec::with_capacity(f.complex().points().len());
    for p in f.complex().points().chunks_exact(d) {
        for i in 0..d {
            points.push((0..d).map(|k| r[i * d + k] * p[k]).sum());
        }
    }
    let mut complex = Complex::new(d, points);
    for s in f.complex().iter() {
        complex.push_sorted(s);
    }
    PlField::new(complex, f.values().to_vec())
}

/// Rotation by `2πj/n`; maps circle direction `v_i` to `v_{i+j}`.
pub fn circle_rotation(n: usize, j: usize) -> [f64; 4] {
    let (c, s) = circle_point(j, n);
    [c, -s, s, c]
}

/// Reflection across the line at angle `πj/n`; maps `v_i` to `v_{j-i}`.
pub fn circle_reflection(n: usize, j: usize) -> [f64; 4] {
    let (c, s) = circle_point(j, n);
    [c, s, s, -c]
}
