use serde::Serialize;

use super::DistanceMatrix;
use crate::error::{Error, Result};

/// Linkage rule for agglomerative clustering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

impl Linkage {
    pub fn name(self) -> &'static str {
        match self {
            Linkage::Average => "average",
            Linkage::Single => "single",
            Linkage::Complete => "complete",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::param(format!("unknown linkage {other:?}"))),
        }
    }
}

/// One merge step. Leaves are clusters `0..n`; the cluster formed at step
/// `s` gets id `n + s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

/// Agglomerative clustering. At each step the two active clusters at
/// minimal linkage distance are merged; ties go to the lexicographically
/// smallest `(a, b)` pair of cluster ids with `a < b`.
pub fn hierarchical_cluster(d: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = d.len();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    let link = |x: &[usize], y: &[usize]| -> f64 {
        let all = x.iter().flat_map(|&i| y.iter().map(move |&j| d.get(i, j)));
        match linkage {
            Linkage::Single => all.fold(f64::INFINITY, f64::min),
            Linkage::Complete => all.fold(0.0, f64::max),
            Linkage::Average => all.sum::<f64>() / (x.len() * y.len()) as f64,
        }
    };

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (p, &a) in active.iter().enumerate() {
            for &b in &active[p + 1..] {
                let dist = link(&members[a], &members[b]);
                if best.is_none_or(|(bd, _, _)| dist < bd) {
                    best = Some((dist, a, b));
                }
            }
        }
        let (distance, a, b) = best.expect("at least two active clusters");
        let mut merged = members[a].clone();
        merged.extend_from_slice(&members[b]);
        merged.sort_unstable();
        let size = merged.len();
        members.push(merged);
        active.retain(|&c| c != a && c != b);
        active.push(members.len() - 1);
        merges.push(Merge { a, b, distance, size });
    }
    Dendrogram { n_leaves: n, merges }
}

/// Flat labels from undoing the last `k - 1` merges. Labels are numbered
/// by first appearance in leaf order.
pub fn cut_tree(tree: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = tree.n_leaves;
    if k == 0 || k > n.max(1) {
        return Err(Error::param(format!("cannot cut {n} leaves into {k} clusters")));
    }
    let mut parent: Vec<usize> = (0..n + tree.merges.len()).collect();
    for (s, m) in tree.merges.iter().take(n - k).enumerate() {
        parent[m.a] = n + s;
        parent[m.b] = n + s;
    }
    let root = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };
    let mut seen: Vec<usize> = Vec::new();
    Ok((0..n)
        .map(|i| {
            let r = root(i);
            seen.iter().position(|&x| x == r).unwrap_or_else(|| {
                seen.push(r);
                seen.len() - 1
            })
        })
        .collect())
}
