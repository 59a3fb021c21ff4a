use serde::Serialize;

use super::{check_labels, DistanceMatrix};
use crate::error::{Error, Result};

/// Median of the off-diagonal distances, the default kernel bandwidth.
pub fn median_bandwidth(d: &DistanceMatrix) -> Result<f64> {
    let mut v = d.pairs();
    if v.is_empty() {
        return Err(Error::Degenerate("bandwidth needs at least two points".into()));
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let med = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
    if med <= 0.0 {
        return Err(Error::Degenerate("median distance is zero".into()));
    }
    Ok(med)
}

/// Gaussian kernel `exp(-d²/λ²)` applied entrywise.
pub fn kernel_matrix(d: &DistanceMatrix, lambda: f64) -> Vec<f64> {
    d.as_flat().iter().map(|&x| (-(x / lambda).powi(2)).exp()).collect()
}

/// Soft-margin kernel SVM trained by SMO.
#[derive(Clone, Debug, Serialize)]
pub struct SvmModel {
    pub lambda: f64,
    pub c: f64,
    /// `alpha_i * y_i` per training point.
    pub coef: Vec<f64>,
    /// Offset `b` in `f(x) = Σ α_i y_i K(x_i, x) + b`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    /// Decision value from the distances of a point to every training
    /// point, in training order.
    pub fn decision(&self, dist_to_train: &[f64]) -> f64 {
        self.coef
            .iter()
            .zip(dist_to_train)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, &x)| c * (-(x / self.lambda).powi(2)).exp())
            .sum::<f64>()
            + self.bias
    }

    /// Indices of training points with nonzero dual coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coef.len()).filter(|&i| self.coef[i] != 0.0).collect()
    }
}

const TOL: f64 = 1e-3;
const TAU: f64 = 1e-12;

/// Trains on the Gaussian kernel of `d` with box constraint `c`. Uses
/// maximal-violating-pair working sets and stops when the KKT gap drops
/// below `1e-3`.
pub fn svm_train(d: &DistanceMatrix, labels: &[i8], c: f64, lambda: f64) -> Result<SvmModel> {
    let n = d.len();
    if labels.len() != n {
        return Err(Error::param(format!("{} labels for {n} points", labels.len())));
    }
    if !(c > 0.0 && c.is_finite()) || !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("C and bandwidth must be positive and finite"));
    }
    check_labels(labels)?;
    let k = kernel_matrix(d, lambda);
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let max_iter = 10_000_000usize.max(100 * n);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if low(alpha[t], y[t]) && -y[t] * grad[t] < gmin {
                gmin = -y[t] * grad[t];
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let quad = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(TAU);
        let step = (gmax - gmin) / quad;
        let (ai, aj) = (alpha[i], alpha[j]);
        let (lo, hi) = if y[i] == y[j] {
            let s = ai + aj;
            ((s - c).max(0.0), s.min(c))
        } else {
            let s = ai - aj;
            (s.max(0.0), (c + s).min(c))
        };
        let new_ai = (ai + y[i] * step).clamp(lo, hi);
        let new_aj = aj + y[i] * y[j] * (ai - new_ai);
        alpha[i] = new_ai;
        alpha[j] = new_aj.clamp(0.0, c);
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[t * n + i] * di + y[j] * k[t * n + j] * dj);
        }
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 { free_sum / n_free as f64 } else { 0.5 * (ub + lb) };
    Ok(SvmModel {
        lambda,
        c,
        coef: alpha.iter().zip(&y).map(|(a, y)| a * y).collect(),
        bias: -rho,
        iterations,
        converged,
    })
}
