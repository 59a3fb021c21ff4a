//! Direction sets on the circle and the sphere.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// `v_j = (cos 2πj/n, sin 2πj/n)`, `j = 0..n`.
    UniformCircle,
    /// Fibonacci lattice on `S^2`.
    FibonacciSphere,
    Explicit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::UniformCircle => "uniform_circle",
            Scheme::FibonacciSphere => "fibonacci_sphere",
            Scheme::Explicit => "explicit",
        }
    }

    pub fn from_name(s: &str) -> Option<Scheme> {
        match s {
            "uniform_circle" => Some(Scheme::UniformCircle),
            "fibonacci_sphere" => Some(Scheme::FibonacciSphere),
            "explicit" => Some(Scheme::Explicit),
            _ => None,
        }
    }
}

/// An ordered list of unit vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    scheme: Scheme,
    vectors: Vec<f64>,
}

const UNIT_TOL: f64 = 1e-12;

impl DirectionSet {
    /// Wraps caller-supplied unit vectors (flat, `dim` coordinates each).
    pub fn explicit(dim: usize, vectors: Vec<f64>) -> Result<Self> {
        DirectionSet::with_scheme(dim, Scheme::Explicit, vectors)
    }

    pub(crate) fn with_scheme(dim: usize, scheme: Scheme, vectors: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::param(format!("directions live in dimension 2 or 3, got {dim}")));
        }
        if vectors.is_empty() || !vectors.len().is_multiple_of(dim) {
            return Err(Error::param("direction buffer is empty or not a multiple of the dimension"));
        }
        for (i, v) in vectors.chunks_exact(dim).enumerate() {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::param(format!("direction {i} has norm {norm}")));
            }
        }
        Ok(DirectionSet { dim, scheme, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.vectors.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.vectors
    }
}

/// `n` directions in dimension 2 (uniform circle) or 3 (Fibonacci sphere).
pub fn make_directions(dim: usize, n: usize) -> Result<DirectionSet> {
    if n == 0 {
        return Err(Error::param("at least one direction is required"));
    }
    match dim {
        2 => {
            let vectors = (0..n).flat_map(|j| {
                let (c, s) = circle_point(j, n);
                [c, s]
            });
            DirectionSet::with_scheme(2, Scheme::UniformCircle, vectors.collect())
        }
        3 => DirectionSet::with_scheme(3, Scheme::FibonacciSphere, fibonacci_sphere(n)),
        _ => Err(Error::param(format!("directions live in dimension 2 or 3, got {dim}"))),
    }
}

/// `(cos 2πj/n, sin 2πj/n)`, reduced to the first octant so that points at
/// multiples of π/4 come out exact.
pub fn circle_point(j: usize, n: usize) -> (f64, f64) {
    // the angle is (a / 4n) of a full turn, i.e. quadrant q plus r/n of a quarter
    let a = (4 * (j % n)) as u64;
    let n = n as u64;
    let q = a / n;
    let r = a % n;
    let (c, s) = if 2 * r == n {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else if 2 * r < n {
        let phi = FRAC_PI_2 * r as f64 / n as f64;
        (phi.cos(), phi.sin())
    } else {
        let phi = FRAC_PI_2 * (n - r) as f64 / n as f64;
        (phi.sin(), phi.cos())
    };
    match q {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

fn fibonacci_sphere(n: usize) -> Vec<f64> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let z = 1.0 - (2 * i + 1) as f64 / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden_angle * i as f64;
        let v = [r * phi.cos(), r * phi.sin(), z];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(v.iter().map(|x| x / norm));
    }
    out
}
