use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// `k` disjoint index sets covering `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn test(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// All indices outside `fold`, ascending.
    pub fn train(&self, fold: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        idx.sort_unstable();
        idx
    }
}

/// Shuffled k-fold split. When `stratified`, indices are dealt class by
/// class so each fold's class counts are within one of the global share.
pub fn kfold_split(ds: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<FoldSplit> {
    let n = ds.n();
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, n });
    }
    let mut rng = rng::seeded(seed);
    let order: Vec<usize> = if stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.class_count()];
        for (i, &y) in ds.labels().iter().enumerate() {
            by_class[y].push(i);
        }
        by_class
            .into_iter()
            .flat_map(|mut members| {
                members.shuffle(&mut rng);
                members
            })
            .collect()
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        all
    };

    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldSplit { folds })
}
