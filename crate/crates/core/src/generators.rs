//! Seeded generators for simulated fields: the four quadric families on the
//! 10³ simulation grid, distance-to-points fields, and 2D bump glyphs for
//! alignment experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{voxel_to_pl, PlField, VoxelGrid};
use crate::rng::derive_seed;

/// Samples per axis of the simulation grid.
pub const SIM_GRID_N: usize = 10;

/// Coordinate `-1 + 2i/9` of the simulation grid.
pub fn sim_coord(i: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (SIM_GRID_N - 1) as f64
}

/// Parameters of one quadric field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadricSpec {
    /// 1: `αx² + βy² + γz²`, 2: `αx² + βy² - γz²`, 3: `αx² - βy² - γz²`,
    /// 4: `(√(αx² + βy²) - δ)² + γz²`.
    pub family: u8,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub noise_sd: f64,
    /// Seed of the noise stream.
    pub seed: u64,
}

impl QuadricSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.family) {
            return Err(Error::param(format!("family must be 1..=4, got {}", self.family)));
        }
        for (name, x) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(0.5..=1.0).contains(&x) {
                return Err(Error::param(format!("{name} = {x} outside [0.5, 1]")));
            }
        }
        if self.family == 4 && !(0.4..=0.6).contains(&self.delta) {
            return Err(Error::param(format!("delta = {} outside [0.4, 0.6]", self.delta)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::param("noise_sd must be a finite non-negative number"));
        }
        Ok(())
    }

    /// Noise-free value at `(x, y, z)`.
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        match self.family {
            1 => a * x * x + b * y * y + g * z * z,
            2 => a * x * x + b * y * y - g * z * z,
            3 => a * x * x - b * y * y - g * z * z,
            _ => {
                let r = (a * x * x + b * y * y).sqrt() - self.delta;
                r * r + g * z * z
            }
        }
    }
}

/// Evaluates a quadric on the 10³ grid over `[-1, 1]³` and adds iid
/// `N(0, noise_sd²)` noise, x fastest.
pub fn gen_quadric(spec: &QuadricSpec) -> Result<VoxelGrid> {
    spec.validate()?;
    let n = SIM_GRID_N;
    let mut values = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                values.push(spec.eval(sim_coord(i), sim_coord(j), sim_coord(k)));
            }
        }
    }
    if spec.noise_sd > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::param(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    let spacing = 2.0 / (n - 1) as f64;
    VoxelGrid::new(vec![n; 3], vec![-1.0; 3], vec![spacing; 3], values)
}

/// One generated member of a simulation suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteMember {
    pub id: String,
    pub family: u8,
    pub spec: QuadricSpec,
    pub grid: VoxelGrid,
}

/// Noise level of each setup: 1 is noise-free, 2 adds `N(0, 0.1²)` noise.
pub fn setup_noise(setup: u8) -> Result<f64> {
    match setup {
        1 => Ok(0.0),
        2 => Ok(0.1),
        _ => Err(Error::param(format!("setup must be 1 or 2, got {setup}"))),
    }
}

/// `n_per_family` fields of each family, ordered by family. Field `m` draws
/// its parameters from the stream `derive_seed(seed, m)` and its noise from
/// `derive_seed(seed, m + 2^32)`.
pub fn gen_field_suite(n_per_family: usize, setup: u8, seed: u64) -> Result<Vec<SuiteMember>> {
    if n_per_family == 0 {
        return Err(Error::param("need at least one field per family"));
    }
    let noise_sd = setup_noise(setup)?;
    let mut out = Vec::with_capacity(4 * n_per_family);
    for family in 1..=4u8 {
        for l in 0..n_per_family {
            let m = (family as usize - 1) * n_per_family + l;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, m as u64));
            let spec = QuadricSpec {
                family,
                alpha: rng.random_range(0.5..=1.0),
                beta: rng.random_range(0.5..=1.0),
                gamma: rng.random_range(0.5..=1.0),
                delta: rng.random_range(0.4..=0.6),
                noise_sd,
                seed: derive_seed(seed, m as u64 + (1 << 32)),
            };
            out.push(SuiteMember {
                id: format!("f{family}_{l:02}"),
                family,
                grid: gen_quadric(&spec)?,
                spec,
            });
        }
    }
    Ok(out)
}

/// Regular sampling grid with `resolution` nodes per axis over the box
/// `[lo, hi]`.
fn box_grid(lo: &[f64], hi: &[f64], resolution: usize, value: impl Fn(&[f64]) -> f64) -> Result<VoxelGrid> {
    if resolution < 2 {
        return Err(Error::param("resolution must be at least 2"));
    }
    let d = lo.len();
    let spacing: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (b - a) / (resolution - 1) as f64).collect();
    let n = resolution.pow(d as u32);
    let mut values = Vec::with_capacity(n);
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    for _ in 0..n {
        for a in 0..d {
            x[a] = lo[a] + spacing[a] * idx[a] as f64;
        }
        values.push(value(&x));
        for i in idx.iter_mut() {
            *i += 1;
            if *i < resolution {
                break;
            }
            *i = 0;
        }
    }
    VoxelGrid::new(vec![resolution; d], lo.to_vec(), spacing, values)
}

/// `x ↦ max(0, R - min_i |x - p_i|)` sampled on a grid covering the points
/// with a margin of `R`. Its superlevel set at `t < R` is the union of the
/// balls of radius `R - t` around the points, up to the PL interpolation.
pub fn gen_point_cloud_field(points: &[Vec<f64>], radius: f64, resolution: usize) -> Result<PlField> {
    let first = points.first().ok_or_else(|| Error::param("no points"))?;
    let d = first.len();
    if !(2..=3).contains(&d) || points.iter().any(|p| p.len() != d) {
        return Err(Error::param("points must all be 2- or 3-dimensional"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("radius must be positive"));
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for a in 0..d {
            lo[a] = lo[a].min(p[a] - radius);
            hi[a] = hi[a].max(p[a] + radius);
        }
    }
    let grid = box_grid(&lo, &hi, resolution, |x| {
        let dmin = points
            .iter()
            .map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        (radius - dmin).max(0.0)
    })?;
    voxel_to_pl(&grid)
}

/// A Gaussian bump `amp · exp(-|x - center|² / (2 sigma²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub sigma: f64,
    pub amp: f64,
}

/// A 2D glyph: a sum of bumps minus a floor, clipped at zero, so the field
/// is compactly supported inside the unit disc.
#[derive(Clone, Debug, PartialEq)]
pub struct Glyph {
    pub bumps: Vec<Bump>,
    pub floor: f64,
}

impl Glyph {
    /// `n_bumps` random bumps with centers within radius 0.5 of the origin.
    pub fn random(n_bumps: usize, seed: u64) -> Glyph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = (0..n_bumps)
            .map(|_| {
                let r = 0.5 * rng.random::<f64>().sqrt();
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                Bump {
                    center: [r * theta.cos(), r * theta.sin()],
                    sigma: rng.random_range(0.08..0.14),
                    amp: rng.random_range(0.5..1.0),
                }
            })
            .collect();
        Glyph { bumps, floor: 0.05 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .bumps
            .iter()
            .map(|b| {
                let d2 = (x[0] - b.center[0]).powi(2) + (x[1] - b.center[1]).powi(2);
                b.amp * (-d2 / (2.0 * b.sigma * b.sigma)).exp()
            })
            .sum();
        (s - self.floor).max(0.0)
    }

    /// The glyph with every bump center rotated by `angle` about the origin.
    pub fn rotated(&self, angle: f64) -> Glyph {
        let (s, c) = angle.sin_cos();
        Glyph {
            bumps: self
                .bumps
                .iter()
                .map(|b| Bump {
                    center: [c * b.center[0] - s * b.center[1], s * b.center[0] + c * b.center[1]],
                    ..*b
                })
                .collect(),
            floor: self.floor,
        }
    }

    /// Samples the glyph on a `resolution²` grid over `[-1, 1]²`.
    pub fn to_field(&self, resolution: usize) -> Result<PlField> {
        voxel_to_pl(&box_grid(&[-1.0, -1.0], &[1.0, 1.0], resolution, |x| self.eval(x))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::superlevel_restrict;

    fn spec(family: u8) -> QuadricSpec {
        QuadricSpec {
            family,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 0.5,
            noise_sd: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn quadric_values() {
        let g = gen_quadric(&spec(1)).unwrap();
        assert_eq!(g.values()[0], 3.0);
        let c = sim_coord(4);
        assert_eq!(c, -1.0 + 8.0 / 9.0);
        assert_eq!(g.values()[g.index(&[4, 4, 4])], c * c + c * c + c * c);

        let s1 = QuadricSpec { alpha: 0.6, beta: 0.7, gamma: 0.8, ..spec(1) };
        let s2 = QuadricSpec { family: 2, ..s1 };
        let (g1, g2) = (gen_quadric(&s1).unwrap(), gen_quadric(&s2).unwrap());
        for k in 0..10 {
            let idx = g1.index(&[3, 5, k]);
            let z = sim_coord(k);
            assert!((g2.values()[idx] - g1.values()[idx] + 2.0 * 0.8 * z * z).abs() < 1e-15);
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let a = gen_field_suite(10, 1, 42).unwrap();
        assert_eq!(a.len(), 40);
        assert_eq!(a, gen_field_suite(10, 1, 42).unwrap());
        assert_eq!(a[0].family, 1);
        assert_eq!(a[39].family, 4);
        for m in &a {
            m.spec.validate().unwrap();
        }
    }

    #[test]
    fn setup_one_ignores_noise_seed() {
        let s = QuadricSpec { seed: 1, ..spec(3) };
        let t = QuadricSpec { seed: 2, ..spec(3) };
        assert_eq!(gen_quadric(&s).unwrap(), gen_quadric(&t).unwrap());
    }

    #[test]
    fn noise_level() {
        let base = gen_field_suite(10, 1, 7).unwrap();
        let noisy = gen_field_suite(10, 2, 7).unwrap();
        let diffs: Vec<f64> = base
            .iter()
            .zip(&noisy)
            .flat_map(|(a, b)| a.grid.values().iter().zip(b.grid.values()).map(|(x, y)| y - x).collect::<Vec<_>>())
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - 0.1).abs() < 0.005, "sd {sd}");
    }

    #[test]
    fn point_cloud_balls() {
        let one = gen_point_cloud_field(&[vec![0.0, 0.0]], 0.5, 41).unwrap();
        assert_eq!(superlevel_restrict(&one, 0.45).unwrap().euler_characteristic(), 1);

        let two = gen_point_cloud_field(&[vec![-0.3, 0.0], vec![0.3, 0.0]], 0.5, 81).unwrap();
        assert_eq!(superlevel_restrict(&two, 0.25).unwrap().euler_characteristic(), 2);
        assert_eq!(superlevel_restrict(&two, 0.15).unwrap().euler_characteristic(), 1);
    }

    #[test]
    fn glyph_support_inside_disc() {
        let g = Glyph::random(4, 9);
        let f = g.to_field(41).unwrap();
        for (p, &v) in f.complex().points().chunks(2).zip(f.values()) {
            if v > 0.0 {
                assert!(p[0] * p[0] + p[1] * p[1] < 1.0);
            }
        }
        let r = g.rotated(std::f64::consts::FRAC_PI_2);
        assert!((r.eval(&[0.0, 0.3]) - g.eval(&[0.3, 0.0])).abs() < 1e-12);
    }
}
