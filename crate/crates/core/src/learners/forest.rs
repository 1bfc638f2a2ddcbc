//! Random forest: bootstrap-aggregated CART trees.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{check_xy, grow_tree, PresortedData, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::{par, rng};

/// Per-split feature fraction used unless configured otherwise.
pub const DEFAULT_MAX_FEATURES: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: f64,
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn new(n_trees: usize, max_depth: usize, min_leaf: usize) -> Self {
        Self {
            n_trees,
            max_depth,
            min_leaf,
            max_features: DEFAULT_MAX_FEATURES,
            bootstrap: true,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("forest needs at least one tree".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParameter("min_leaf must be >= 1".into()));
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "max_features {} outside (0, 1]",
                self.max_features
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for t in &self.trees {
            s += t.predict_row(x);
        }
        s / self.trees.len() as f64
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

/// Bootstrap multiplicities for `m` rows: `m` draws with replacement.
pub fn bootstrap_counts(m: usize, seed: u64) -> Vec<u32> {
    let mut r = rng::rng_from_seed(seed);
    let mut counts = vec![0u32; m];
    for _ in 0..m {
        counts[r.random_range(0..m)] += 1;
    }
    counts
}

pub fn fit_random_forest(x: &Matrix, y: &[f64], params: &ForestParams, seed: u64) -> Result<RandomForest> {
    check_xy(x, y)?;
    params.check()?;
    let m = x.rows();
    let replicates: Vec<Option<Vec<u32>>> = (0..params.n_trees)
        .map(|t| {
            params
                .bootstrap
                .then(|| bootstrap_counts(m, rng::derive_seed(seed, &[0xB007, t as u64])))
        })
        .collect();
    Ok(grow_forest(x, y, params, replicates, seed))
}

/// Grows one tree per supplied row-weight vector (`None` = every row once).
/// Split randomness for tree `t` depends only on `seed` and `t`.
pub fn fit_random_forest_with_weights(
    x: &Matrix,
    y: &[f64],
    params: &ForestParams,
    weights: Vec<Option<Vec<u32>>>,
    seed: u64,
) -> Result<RandomForest> {
    check_xy(x, y)?;
    params.check()?;
    if weights.len() != params.n_trees {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: params.n_trees,
        });
    }
    for w in weights.iter().flatten() {
        if w.len() != x.rows() {
            return Err(Error::LengthMismatch {
                left: w.len(),
                right: x.rows(),
            });
        }
    }
    Ok(grow_forest(x, y, params, weights, seed))
}

fn grow_forest(
    x: &Matrix,
    y: &[f64],
    params: &ForestParams,
    weights: Vec<Option<Vec<u32>>>,
    seed: u64,
) -> RandomForest {
    let data = PresortedData::new(x);
    let features: Vec<usize> = (0..x.cols()).collect();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        feature_subset_ratio: params.max_features,
    };
    let jobs: Vec<(usize, Option<Vec<u32>>)> = weights.into_iter().enumerate().collect();
    let trees = par::map(jobs, |(t, w)| {
        let r = rng::rng_from_seed(rng::derive_seed(seed, &[0x5E1F, t as u64]));
        grow_tree(&data, y, w.as_deref(), &features, tree_params, r)
    });
    RandomForest { trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree::fit_tree;

    fn data(m: usize) -> (Matrix, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let f = i as f64;
                vec![(f * 0.37).sin(), (f * 0.11).cos() * 3.0, (i % 7) as f64]
            })
            .collect();
        let y = rows.iter().map(|r| r[0] * 10.0 + r[1] * r[2]).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn single_full_tree_matches_fit_tree() {
        let (x, y) = data(80);
        let p = ForestParams {
            n_trees: 1,
            max_depth: 4,
            min_leaf: 2,
            max_features: 1.0,
            bootstrap: false,
        };
        let f = fit_random_forest(&x, &y, &p, 3).unwrap();
        let t = fit_tree(&x, &y, 4, 2, 1.0, 99).unwrap();
        assert_eq!(f.trees[0], t);
    }

    #[test]
    fn prediction_is_tree_mean() {
        let (x, y) = data(120);
        let f = fit_random_forest(&x, &y, &ForestParams::new(7, 5, 1), 11).unwrap();
        for i in 0..x.rows() {
            let mean = f.trees.iter().map(|t| t.predict_row(x.row(i))).sum::<f64>() / 7.0;
            assert!((f.predict_row(x.row(i)) - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_determinism() {
        let (x, y) = data(100);
        let p = ForestParams::new(5, 4, 2);
        assert_eq!(fit_random_forest(&x, &y, &p, 1).unwrap(), fit_random_forest(&x, &y, &p, 1).unwrap());
        assert_ne!(fit_random_forest(&x, &y, &p, 1).unwrap(), fit_random_forest(&x, &y, &p, 2).unwrap());
    }

    #[test]
    fn bootstrap_counts_sum_to_m() {
        let c = bootstrap_counts(57, 4);
        assert_eq!(c.iter().sum::<u32>(), 57);
    }
}
