#![allow(dead_code)]

use lect::{voxel_to_pl, Complex, PlField, VoxelGrid};
use rand::seq::index::sample;
use rand::Rng;

/// Random abstract complex on random points in `[-1, 1]^d`: the closure of
/// a handful of random simplices, redrawn until it has at most
/// `max_simplices` simplices.
pub fn random_complex(rng: &mut impl Rng, d: usize, max_simplices: usize) -> Complex {
    loop {
        let nv = rng.random_range(4..=12);
        let points: Vec<f64> = (0..nv * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n_top = rng.random_range(1..=10);
        let tops: Vec<Vec<u32>> = (0..n_top)
            .map(|_| {
                let k = rng.random_range(1..=(d + 1).min(nv));
                let mut s: Vec<u32> = sample(rng, nv, k).into_iter().map(|i| i as u32).collect();
                s.sort_unstable();
                s
            })
            .collect();
        let c = Complex::closure_of(d, points, &tops).unwrap();
        if c.num_simplices() <= max_simplices {
            return c;
        }
    }
}

/// Lower-star count of `χ({x . v ≤ h})` restricted to the simplices
/// accepted by `keep`.
pub fn brute_chi(k: &Complex, v: &[f64], h: f64, keep: impl Fn(&[u32]) -> bool) -> i64 {
    k.iter()
        .filter(|s| keep(s))
        .filter(|s| s.iter().all(|&i| k.point(i as usize).iter().zip(v).map(|(x, y)| x * y).sum::<f64>() <= h))
        .map(|s| if s.len() % 2 == 1 { 1 } else { -1 })
        .sum()
}

/// A 2D grid field with random values whose vertices are jittered off the
/// lattice, so that no two vertices share a height in any direction.
pub fn jittered_field_2d(rng: &mut impl Rng, n: usize) -> PlField {
    let values: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..1.0)).collect();
    let step = 2.0 / (n - 1) as f64;
    let grid = VoxelGrid::new(vec![n, n], vec![-1.0, -1.0], vec![step, step], values).unwrap();
    let f = voxel_to_pl(&grid).unwrap();
    let mut points = f.complex().points().to_vec();
    for x in &mut points {
        *x += rng.random_range(-0.2..0.2) * step;
    }
    let simplices: Vec<Vec<u32>> = f.complex().iter().map(<[u32]>::to_vec).collect();
    PlField::from_parts(2, points, f.values().to_vec(), simplices).unwrap()
}

/// Composite trapezoid weights on sorted nodes; a single node gets weight 1.
pub fn trapezoid(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|j| {
            let left = if j > 0 { xs[j] - xs[j - 1] } else { 0.0 };
            let right = if j + 1 < n { xs[j + 1] - xs[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}
