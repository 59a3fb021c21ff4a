use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::check_labels;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Stratified train/test split. Each class (negatives first) is shuffled
/// with its own seeded stream and the first `ceil(fraction * n_c)` members
/// go to training. Both index lists are returned sorted.
pub fn split_train_test(labels: &[i8], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param(format!("train fraction {fraction} outside (0, 1)")));
    }
    check_labels(labels)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, class) in [-1i8, 1].into_iter().enumerate() {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::Degenerate(format!("class {class} has fewer than two members")));
        }
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64)));
        let k = ((fraction * idx.len() as f64).ceil() as usize).min(idx.len() - 1);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_sizes() {
        let labels: Vec<i8> = (0..20).map(|i| if i < 8 { 1 } else { -1 }).collect();
        let (tr, te) = split_train_test(&labels, 0.7, 3).unwrap();
        assert_eq!(tr.iter().filter(|&&i| labels[i] == 1).count(), 6);
        assert_eq!(tr.iter().filter(|&&i| labels[i] == -1).count(), 9);
        assert_eq!(tr.len() + te.len(), 20);
        assert!(tr.iter().all(|i| !te.contains(i)));
        assert_eq!(split_train_test(&labels, 0.7, 3).unwrap(), (tr, te));
    }

    #[test]
    fn unbalanced_rounds_up() {
        let labels: Vec<i8> = (0..10).map(|i| if i < 7 { 1 } else { -1 }).collect();
        let (tr, _) = split_train_test(&labels, 0.5, 0).unwrap();
        assert_eq!(tr.iter().filter(|&&i| labels[i] == 1).count(), 4);
        assert_eq!(tr.iter().filter(|&&i| labels[i] == -1).count(), 2);
    }

    #[test]
    fn seeds_differ() {
        let labels: Vec<i8> = (0..40).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        assert_ne!(split_train_test(&labels, 0.5, 1).unwrap(), split_train_test(&labels, 0.5, 2).unwrap());
    }
}
