use statrs::distribution::{ContinuousCDF, Normal};

use super::check_labels;
use crate::error::{Error, Result};

fn psi(pos: f64, neg: f64) -> f64 {
    if pos > neg {
        1.0
    } else if pos == neg {
        0.5
    } else {
        0.0
    }
}

fn split_scores(scores: &[f64], labels: &[i8]) -> Result<(Vec<f64>, Vec<f64>)> {
    if scores.len() != labels.len() {
        return Err(Error::param(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    check_labels(labels)?;
    let pos = scores.iter().zip(labels).filter(|(_, &y)| y == 1).map(|(&s, _)| s).collect();
    let neg = scores.iter().zip(labels).filter(|(_, &y)| y == -1).map(|(&s, _)| s).collect();
    Ok((pos, neg))
}

/// Area under the ROC curve for scores where larger means positive,
/// computed as the Mann-Whitney statistic with ties counted as one half.
pub fn auc(scores: &[f64], labels: &[i8]) -> Result<f64> {
    let (pos, neg) = split_scores(scores, labels)?;
    let total: f64 = pos.iter().map(|&p| neg.iter().map(|&q| psi(p, q)).sum::<f64>()).sum();
    Ok(total / (pos.len() * neg.len()) as f64)
}

/// DeLong confidence interval for the AUC at the given level, clipped to
/// `[0, 1]`. Returns `(auc, lower, upper)`.
pub fn delong_ci(scores: &[f64], labels: &[i8], level: f64) -> Result<(f64, f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("confidence level {level} outside (0, 1)")));
    }
    let (pos, neg) = split_scores(scores, labels)?;
    let (m, n) = (pos.len() as f64, neg.len() as f64);
    let v10: Vec<f64> = pos.iter().map(|&p| neg.iter().map(|&q| psi(p, q)).sum::<f64>() / n).collect();
    let v01: Vec<f64> = neg.iter().map(|&q| pos.iter().map(|&p| psi(p, q)).sum::<f64>() / m).collect();
    let a = v10.iter().sum::<f64>() / m;
    let var = |v: &[f64]| {
        if v.len() < 2 {
            0.0
        } else {
            v.iter().map(|x| (x - a).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        }
    };
    let se = (var(&v10) / m + var(&v01) / n).sqrt();
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    Ok((a, (a - z * se).max(0.0), (a + z * se).min(1.0)))
}
