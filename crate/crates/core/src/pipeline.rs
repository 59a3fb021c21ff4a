//! End-to-end helpers: suite preparation, shared scan axes, distance
//! matrices, cluster scoring and classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{mean_grid, real_grid_distance, select_distance_with, DistanceOptions};
use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::field::{global_range, normalize_field, voxel_to_pl, Normalization, PlField, VoxelGrid};
use crate::grid::{TransformGrid, TransformKind};
use crate::stats::{auc, delong_ci, median_bandwidth, split_train_test, svm_train, DistanceMatrix};
use crate::transform::{ect_transform, lect_transform, scan_radius, select_transform, uniform_heights, ScanRequest};

/// Converts voxel grids to PL fields and rescales all of them by one
/// global affine map onto `[0, 1]`.
pub fn prepare_fields(grids: &[&VoxelGrid]) -> Result<Vec<PlField>> {
    let fields = grids.par_iter().map(|g| voxel_to_pl(g)).collect::<Result<Vec<_>>>()?;
    let (min, max) = global_range(&fields);
    fields
        .iter()
        .map(|f| Ok(normalize_field(f, Normalization::Global { min, max }, false)?.field))
        .collect()
}

/// A scan request whose height axis covers every field in every direction,
/// so that grids of different fields are directly comparable.
pub fn shared_request(
    kind: TransformKind,
    fields: &[PlField],
    directions: DirectionSet,
    n_heights: usize,
    thresholds: Vec<f64>,
) -> Result<ScanRequest> {
    let radius = scan_radius(fields.iter().map(PlField::complex), &directions);
    let heights = uniform_heights(radius, n_heights)?;
    let thresholds = if kind == TransformKind::Ect { Vec::new() } else { thresholds };
    ScanRequest::new(kind, directions, heights, thresholds)
}

/// Applies the requested transform to one field. ECT requests scan the
/// underlying complex.
pub fn transform_field(f: &PlField, req: &ScanRequest) -> Result<TransformGrid> {
    match req.kind {
        TransformKind::Select => select_transform(f, req),
        TransformKind::Lect => lect_transform(f, req),
        TransformKind::Ect => ect_transform(f.complex(), req),
    }
}

pub fn transform_all(fields: &[PlField], req: &ScanRequest) -> Result<Vec<TransformGrid>> {
    fields.iter().map(|f| transform_field(f, req)).collect()
}

/// Pairwise transform distances, computed in parallel over pairs.
pub fn distance_matrix(ids: Vec<String>, grids: &[TransformGrid], opts: &DistanceOptions) -> Result<DistanceMatrix> {
    let n = grids.len();
    if ids.len() != n {
        return Err(Error::param(format!("{} ids for {n} grids", ids.len())));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let dists = pairs
        .par_iter()
        .map(|&(i, j)| select_distance_with(&grids[i], &grids[j], opts))
        .collect::<Result<Vec<_>>>()?;
    let mut d = vec![0.0; n * n];
    for (&(i, j), x) in pairs.iter().zip(dists) {
        d[i * n + j] = x;
        d[j * n + i] = x;
    }
    DistanceMatrix::new(ids, d)
}

/// Fraction of points whose predicted cluster's majority label matches
/// their own label.
pub fn purity(truth: &[usize], predicted: &[usize]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let mut clusters: Vec<usize> = predicted.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    let hits: usize = clusters
        .iter()
        .map(|&c| {
            let mut labels: Vec<usize> = truth.iter().zip(predicted).filter(|(_, &p)| p == c).map(|(&t, _)| t).collect();
            labels.sort_unstable();
            labels.chunk_by(|a, b| a == b).map(<[usize]>::len).max().unwrap_or(0)
        })
        .sum();
    hits as f64 / truth.len() as f64
}

/// Purity of the cluster holding the most members of `label` (ties go to
/// the purer cluster): the fraction of that cluster carrying `label`.
pub fn class_purity(truth: &[usize], predicted: &[usize], label: usize) -> f64 {
    let mut best = (0usize, 0.0f64);
    for &c in predicted {
        let size = predicted.iter().filter(|&&p| p == c).count();
        let inside = (0..truth.len()).filter(|&i| truth[i] == label && predicted[i] == c).count();
        let share = inside as f64 / size as f64;
        if inside > best.0 || (inside == best.0 && share > best.1) {
            best = (inside, share);
        }
    }
    best.1
}

/// Distances between the mean transform grids of each group. Groups are
/// returned sorted, with the matrix indexed in that order.
pub fn centroid_distances(grids: &[TransformGrid], groups: &[usize], opts: &DistanceOptions) -> Result<(Vec<usize>, Vec<f64>)> {
    if grids.len() != groups.len() || grids.is_empty() {
        return Err(Error::param("need one group label per grid"));
    }
    let mut labels = groups.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let means = labels
        .iter()
        .map(|&g| {
            let members: Vec<&TransformGrid> = grids.iter().zip(groups).filter(|(_, &x)| x == g).map(|(m, _)| m).collect();
            mean_grid(&members)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = labels.len();
    let mut d = vec![0.0; m * m];
    for a in 0..m {
        for b in a + 1..m {
            let x = real_grid_distance(&grids[0], &means[a], &means[b], opts)?;
            d[a * m + b] = x;
            d[b * m + a] = x;
        }
    }
    Ok((labels, d))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub auc: f64,
    pub ci_level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub lambda: f64,
    pub c: f64,
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub test_scores: Vec<f64>,
    pub test_labels: Vec<i8>,
    pub n_support: usize,
    pub converged: bool,
}

/// Stratified split, SVM with median-heuristic bandwidth fitted on the
/// training block, and AUC with a DeLong interval on the test block.
pub fn classify(d: &DistanceMatrix, labels: &[i8], train_fraction: f64, c: f64, seed: u64) -> Result<ClassifyReport> {
    if labels.len() != d.len() {
        return Err(Error::param(format!("{} labels for {} points", labels.len(), d.len())));
    }
    let (train, test) = split_train_test(labels, train_fraction, seed)?;
    let dtrain = d.submatrix(&train);
    let ytrain: Vec<i8> = train.iter().map(|&i| labels[i]).collect();
    let lambda = median_bandwidth(&dtrain)?;
    let model = svm_train(&dtrain, &ytrain, c, lambda)?;
    let test_scores: Vec<f64> = test
        .iter()
        .map(|&i| {
            let row: Vec<f64> = train.iter().map(|&j| d.get(i, j)).collect();
            model.decision(&row)
        })
        .collect();
    let test_labels: Vec<i8> = test.iter().map(|&i| labels[i]).collect();
    let level = 0.95;
    let area = auc(&test_scores, &test_labels)?;
    let (_, lo, hi) = delong_ci(&test_scores, &test_labels, level)?;
    Ok(ClassifyReport {
        auc: area,
        ci_level: level,
        ci_low: lo,
        ci_high: hi,
        lambda,
        c,
        seed,
        train_ids: train.iter().map(|&i| d.ids()[i].clone()).collect(),
        test_ids: test.iter().map(|&i| d.ids()[i].clone()).collect(),
        test_scores,
        test_labels,
        n_support: model.support().len(),
        converged: model.converged,
    })
}
