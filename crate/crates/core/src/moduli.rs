//! Membership checks for the class `K(d, k, δ_k, δ_B)` of PL fields and the
//! bound on the number of Euler scans that determine such a field.
//!
//! The four conditions are
//!
//! 1. `f` is piecewise linear on a compact complex with values in `[0, 1]`;
//! 2. values at the two ends of every edge differ by at least `3 δ_B`;
//! 3. every edge is observable from a whole ball `B(v₀, δ_k)` of directions;
//! 4. no Euler scan has more than `k` jumps.
//!
//! Conditions 2 and 4 (on a sampled set of scans) are checked exactly.
//! Condition 3 quantifies over a continuum of directions and is only
//! sampled, so its status may honestly be [`Observability::Unknown`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::clip::superlevel_restrict;
use crate::complex::{dot, MAX_SIMPLEX_DIM};
use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::field::PlField;
use crate::rng::derive_seed;
use crate::transform::ect_curve;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModuliParams {
    pub d: usize,
    /// Largest number of jumps allowed in a scan.
    pub k: usize,
    /// Radius of the observing direction ball, in radians.
    pub delta_k: f64,
    /// Vertical gap unit: neighboring knots differ by at least `3 delta_b`.
    pub delta_b: f64,
    /// Geometric parameter of the shape-class bound.
    pub delta: f64,
}

impl ModuliParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 {
            return Err(Error::param("d and k must be positive"));
        }
        for (name, x) in [("delta_k", self.delta_k), ("delta_b", self.delta_b), ("delta", self.delta)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::param(format!("{name} must be positive, got {x}")));
            }
        }
        if self.delta_b > 1.0 / 3.0 + 1e-9 {
            return Err(Error::param(format!("delta_b must be at most 1/3, got {}", self.delta_b)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeWitness {
    pub edge: [u32; 2],
    pub values: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCheck {
    pub pass: bool,
    /// First edge whose values differ by less than `3 δ_B`.
    pub witness: Option<EdgeWitness>,
}

/// Condition 2: every edge spans at least `3 δ_B` in value.
pub fn check_gap_condition(f: &PlField, delta_b: f64) -> GapCheck {
    let vals = f.values();
    let witness = f.complex().simplices(1).find_map(|e| {
        let (a, b) = (vals[e[0] as usize], vals[e[1] as usize]);
        ((a - b).abs() < 3.0 * delta_b).then(|| EdgeWitness {
            edge: [e[0], e[1]],
            values: [a, b],
        })
    });
    GapCheck {
        pass: witness.is_none(),
        witness,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpCount {
    pub max_jumps: usize,
    /// Direction index and threshold of a scan attaining the maximum.
    pub direction: usize,
    pub threshold: f64,
}

/// Condition 4 on a sample: the largest number of jumps of an exact Euler
/// scan over the given directions and thresholds.
pub fn max_jump_count(f: &PlField, directions: &DirectionSet, thresholds: &[f64]) -> Result<JumpCount> {
    if directions.dim() != f.dim() {
        return Err(Error::param("direction dimension does not match the field"));
    }
    let mut best = JumpCount {
        max_jumps: 0,
        direction: 0,
        threshold: thresholds.first().copied().unwrap_or(1.0),
    };
    for &t in thresholds {
        let sup = superlevel_restrict(f, t)?;
        let counts: Vec<usize> = (0..directions.len())
            .into_par_iter()
            .map(|i| ect_curve(&sup.complex, directions.get(i)).num_jumps())
            .collect();
        for (i, c) in counts.into_iter().enumerate() {
            if c > best.max_jumps {
                best = JumpCount {
                    max_jumps: c,
                    direction: i,
                    threshold: t,
                };
            }
        }
    }
    Ok(best)
}

/// Change of the scan of `{f ≥ t}` in direction `v` at the height of the
/// point where edge `{a, b}` crosses level `t`. `None` if the edge does not
/// cross `t` strictly between its end values.
pub fn crossing_jump(f: &PlField, a: u32, b: u32, t: f64, v: &[f64]) -> Result<Option<i64>> {
    let sup = superlevel_restrict(f, t)?;
    let Some(p) = sup.crossing_vertex(a, b) else {
        return Ok(None);
    };
    let c = &sup.complex;
    let heights = c.heights(v);
    let target = heights[p];
    let mut change = 0;
    for (dim, sign) in (0..=MAX_SIMPLEX_DIM).zip([1i64, -1, 1, -1]) {
        for s in c.simplices(dim) {
            let top = s.iter().map(|&i| heights[i as usize]).fold(f64::NEG_INFINITY, f64::max);
            if top == target {
                change += sign;
            }
        }
    }
    Ok(Some(change))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observability {
    /// Some sampled ball has every sampled direction observing the edge.
    VerifiedSampled,
    /// No sampled direction observes the edge.
    Violated,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeObservation {
    pub edge: [u32; 2],
    pub threshold: f64,
    pub status: Observability,
    /// Center of a fully observing ball, when one was found.
    pub center: Option<Vec<f64>>,
}

/// Condition 3 by sampling. For every non-constant edge the scan is tested
/// at the middle of the edge's value range (observability does not depend
/// on the level inside that range): `n_samples` random ball centers, each
/// with `n_samples` random directions inside `B(v₀, δ_k)`.
pub fn check_observability(f: &PlField, delta_k: f64, n_samples: usize, seed: u64) -> Result<Vec<EdgeObservation>> {
    if n_samples == 0 || delta_k.is_nan() || delta_k <= 0.0 {
        return Err(Error::param("need a positive sample count and ball radius"));
    }
    let d = f.dim();
    if !(2..=3).contains(&d) {
        return Err(Error::param("observability checks need a 2- or 3-dimensional field"));
    }
    let vals = f.values();
    let edges: Vec<[u32; 2]> = f.complex().simplices(1).map(|e| [e[0], e[1]]).filter(|e| vals[e[0] as usize] != vals[e[1] as usize]).collect();
    edges
        .par_iter()
        .enumerate()
        .map(|(n, &[a, b])| {
            let t = (vals[a as usize] + vals[b as usize]) / 2.0;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n as u64));
            let mut any_jump = false;
            let mut center = None;
            for _ in 0..n_samples {
                let v0 = random_unit(&mut rng, d);
                let mut all = true;
                for _ in 0..n_samples {
                    let v = random_in_cap(&mut rng, &v0, delta_k);
                    let jump = crossing_jump(f, a, b, t, &v)?.unwrap_or(0) != 0;
                    any_jump |= jump;
                    all &= jump;
                }
                if all {
                    center = Some(v0);
                    break;
                }
            }
            let status = if center.is_some() {
                Observability::VerifiedSampled
            } else if any_jump {
                Observability::Unknown
            } else {
                Observability::Violated
            };
            Ok(EdgeObservation {
                edge: [a, b],
                threshold: t,
                status,
                center,
            })
        })
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform direction within geodesic distance `radius` of `center`.
fn random_in_cap(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let radius = radius.min(std::f64::consts::PI);
    if center.len() == 2 {
        let theta = center[1].atan2(center[0]) + rng.random_range(-radius..=radius);
        return vec![theta.cos(), theta.sin()];
    }
    let cos_alpha = 1.0 - rng.random::<f64>() * (1.0 - radius.cos());
    let sin_alpha = (1.0 - cos_alpha * cos_alpha).max(0.0).sqrt();
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    // orthonormal frame (e1, e2) perpendicular to the center
    let helper = if center[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(&cross(center, &helper));
    let e2 = cross(center, &e1);
    let v: Vec<f64> = (0..3)
        .map(|i| cos_alpha * center[i] + sin_alpha * (phi.cos() * e1[i] + phi.sin() * e2[i]))
        .collect();
    normalize(&v)
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}

/// How a combinatorial neighbor sits relative to the edge `(x₀, x₁)` with
/// `f(x₀) < f(x₁)` in a triangle `(x₀, x₁, x₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NeighborCase {
    /// `f(x₀) < f(x₂) < f(x₁)`: both other edges, dominated.
    Between,
    /// `f(x₂) < f(x₀)`: the edge `(x₂, x₁)`, dominating.
    Below,
    /// `f(x₂) > f(x₁)`: the edge `(x₀, x₂)`, dominating.
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Neighbor {
    pub edge: [u32; 2],
    pub case: NeighborCase,
}

impl Neighbor {
    pub fn is_dominating(&self) -> bool {
        self.case != NeighborCase::Between
    }
}

fn sorted_edge(a: u32, b: u32) -> [u32; 2] {
    [a.min(b), a.max(b)]
}

/// Combinatorial neighbors of edge `{a, b}`, read off the triangles that
/// contain it. Sorted by edge.
pub fn combinatorial_neighbors(f: &PlField, a: u32, b: u32) -> Vec<Neighbor> {
    let vals = f.values();
    let (x0, x1) = if vals[a as usize] <= vals[b as usize] { (a, b) } else { (b, a) };
    let (f0, f1) = (vals[x0 as usize], vals[x1 as usize]);
    let mut out = Vec::new();
    for tri in f.complex().simplices(2) {
        if !(tri.contains(&a) && tri.contains(&b)) {
            continue;
        }
        let x2 = *tri.iter().find(|&&v| v != a && v != b).expect("triangle has a third vertex");
        let f2 = vals[x2 as usize];
        if f0 < f2 && f2 < f1 {
            out.push(Neighbor {
                edge: sorted_edge(x0, x2),
                case: NeighborCase::Between,
            });
            out.push(Neighbor {
                edge: sorted_edge(x2, x1),
                case: NeighborCase::Between,
            });
        } else if f2 < f0 && f0 < f1 {
            out.push(Neighbor {
                edge: sorted_edge(x2, x1),
                case: NeighborCase::Below,
            });
        } else if f0 < f1 && f1 < f2 {
            out.push(Neighbor {
                edge: sorted_edge(x0, x2),
                case: NeighborCase::Above,
            });
        }
    }
    out.sort_by_key(|n| n.edge);
    out.dedup();
    out
}

/// Superlevel neighbors of edge `{a, b}` found by inspecting the superlevel
/// complexes directly: edges whose crossing vertex is joined to the crossing
/// vertex of `{a, b}` by a cut segment lying in a triangle of the field.
/// One level between each pair of consecutive vertex values is inspected.
pub fn superlevel_neighbors(f: &PlField, a: u32, b: u32) -> Result<Vec<[u32; 2]>> {
    use crate::clip::VertexOrigin;
    let vals = f.values();
    let (lo, hi) = {
        let (x, y) = (vals[a as usize], vals[b as usize]);
        (x.min(y), x.max(y))
    };
    let mut levels: Vec<f64> = vals.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut out: Vec<[u32; 2]> = Vec::new();
    for w in levels.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        if !(lo < t && t < hi) || t <= 0.0 || t > 1.0 {
            continue;
        }
        let sup = superlevel_restrict(f, t)?;
        let Some(p) = sup.crossing_vertex(a, b) else { continue };
        let edge_of = |v: usize| match sup.provenance[v] {
            VertexOrigin::Crossing { lo, hi, .. } => Some(sorted_edge(lo, hi)),
            VertexOrigin::Original(_) => None,
        };
        for seg in sup.complex.simplices(1) {
            let other = if seg[0] as usize == p {
                seg[1]
            } else if seg[1] as usize == p {
                seg[0]
            } else {
                continue;
            };
            let Some(e) = edge_of(other as usize) else { continue };
            let mut tri = [a, b, e[0], e[1]];
            tri.sort_unstable();
            let mut verts: Vec<u32> = tri.to_vec();
            verts.dedup();
            if verts.len() == 3 && f.complex().simplices(2).any(|s| s == verts.as_slice()) {
                out.push(e);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Explicit part of the scan-count bound,
/// `⌈((d-1)k + 1)(1 + 3/δ)^d⌉ · ⌊1/δ_B⌋`; the lower-order term of the bound
/// has an unspecified constant and is not evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaBound {
    pub leading_term: u64,
    /// `((d-1)k + 1)(1 + 3/δ)^d`, the number of scans per level.
    pub per_level: f64,
    /// `⌊1/δ_B⌋`, the number of levels.
    pub level_factor: u64,
    pub note: String,
}

pub fn delta_bound(params: &ModuliParams) -> Result<DeltaBound> {
    params.validate()?;
    let d = params.d as f64;
    let per_level = (((params.d - 1) * params.k + 1) as f64) * (1.0 + 3.0 / params.delta).powf(d);
    // decimal inputs such as 0.1 must not lose a level to rounding
    let level_factor = (1.0 / params.delta_b + 1e-9).floor() as u64;
    let leading = (per_level * level_factor as f64 - 1e-9).ceil() as u64;
    Ok(DeltaBound {
        leading_term: leading,
        per_level,
        level_factor,
        note: "leading term only; the O(d^(d+1) k^(2d) / delta^(2d(d-1))) correction has an unspecified constant and is not included"
            .to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    pub params: ModuliParams,
    /// PL on a compact complex with values in `[0, 1]`.
    pub cond1: bool,
    pub cond2: GapCheck,
    pub cond3: Observability,
    pub cond3_edges: Vec<EdgeObservation>,
    pub cond4: JumpCount,
    pub cond4_pass: bool,
    pub overall: Verdict,
}

/// Runs all four checks. Scans for condition 4 use the given directions and
/// thresholds.
pub fn verify_class(
    f: &PlField,
    params: &ModuliParams,
    directions: &DirectionSet,
    thresholds: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ClassReport> {
    params.validate()?;
    if params.d != f.dim() {
        return Err(Error::param(format!("params are for d = {} but the field has d = {}", params.d, f.dim())));
    }
    let cond1 = f.values().iter().all(|&v| (0.0..=1.0).contains(&v));
    let cond2 = check_gap_condition(f, params.delta_b);
    let cond3_edges = check_observability(f, params.delta_k, n_samples, seed)?;
    let cond3 = if cond3_edges.iter().any(|e| e.status == Observability::Violated) {
        Observability::Violated
    } else if cond3_edges.iter().all(|e| e.status == Observability::VerifiedSampled) {
        Observability::VerifiedSampled
    } else {
        Observability::Unknown
    };
    let cond4 = max_jump_count(f, directions, thresholds)?;
    let cond4_pass = cond4.max_jumps <= params.k;
    let overall = if !cond1 || !cond2.pass || !cond4_pass || cond3 == Observability::Violated {
        Verdict::Fail
    } else if cond3 == Observability::VerifiedSampled {
        Verdict::Pass
    } else {
        Verdict::Unknown
    };
    Ok(ClassReport {
        params: *params,
        cond1,
        cond2,
        cond3,
        cond3_edges,
        cond4,
        cond4_pass,
        overall,
    })
}
