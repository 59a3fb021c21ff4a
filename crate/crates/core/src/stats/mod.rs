//! Statistics on distance matrices: embedding, clustering and kernel
//! classification.

mod cluster;
mod mds;
mod roc;
mod split;
mod svm;

pub use cluster::{cut_tree, hierarchical_cluster, Dendrogram, Linkage, Merge};
pub use mds::classical_mds;
pub use roc::{auc, delong_ci};
pub use split::split_train_test;
pub use svm::{kernel_matrix, median_bandwidth, svm_train, SvmModel};

use crate::error::{Error, Result};

/// Symmetric matrix of pairwise distances with identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry (to 1e-12), a zero diagonal and non-negative
    /// entries. `d` is row-major `n x n`.
    pub fn new(ids: Vec<String>, d: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if d.len() != n * n {
            return Err(Error::param(format!("{} entries for {n} ids", d.len())));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::param(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let x = d[i * n + j];
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::param(format!("entry ({i}, {j}) = {x} is not a finite non-negative number")));
                }
                if (x - d[j * n + i]).abs() > 1e-12 {
                    return Err(Error::param(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { ids, d })
    }

    /// Builds the matrix from a function of index pairs evaluated on `i < j`.
    pub fn from_fn(ids: Vec<String>, mut dist: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = ids.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = dist(i, j);
                d[i * n + j] = x;
                d[j * n + i] = x;
            }
        }
        DistanceMatrix::new(ids, d)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.len() + j]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.d
    }

    /// Restriction to the given rows and columns, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> DistanceMatrix {
        let d = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        DistanceMatrix {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            d,
        }
    }

    /// Off-diagonal entries `d(i, j)` with `i < j`.
    pub fn pairs(&self) -> Vec<f64> {
        let n = self.len();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).collect()
    }
}

pub(crate) fn check_labels(labels: &[i8]) -> Result<(usize, usize)> {
    if let Some(&bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::param(format!("labels must be +1 or -1, got {bad}")));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate("both classes must be present".into()));
    }
    Ok((pos, neg))
}
