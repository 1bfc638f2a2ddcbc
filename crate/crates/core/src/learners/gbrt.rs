//! Gradient boosted regression trees on squared error with shrinkage and
//! per-tree column subsampling.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::tree::{check_xy, grow_tree, subset_size, PresortedData, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbrtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub col_subsample: f64,
    pub min_leaf: usize,
}

impl GbrtParams {
    pub fn new(n_trees: usize, max_depth: usize, learning_rate: f64, col_subsample: f64) -> Self {
        Self {
            n_trees,
            max_depth,
            learning_rate,
            col_subsample,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

impl BoostedTrees {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut p = self.base_score;
        for t in &self.trees {
            p += self.learning_rate * t.predict_row(x);
        }
        p
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

/// Fitted ensemble plus the training MSE after each stage (index 0 is the
/// base score alone).
#[derive(Debug, Clone, PartialEq)]
pub struct GbrtFit {
    pub model: BoostedTrees,
    pub stage_mse: Vec<f64>,
}

pub fn fit_gbrt(x: &Matrix, y: &[f64], params: &GbrtParams, seed: u64) -> Result<BoostedTrees> {
    fit_gbrt_traced(x, y, params, seed).map(|f| f.model)
}

pub fn fit_gbrt_traced(x: &Matrix, y: &[f64], params: &GbrtParams, seed: u64) -> Result<GbrtFit> {
    check_xy(x, y)?;
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(Error::InvalidParameter("n_trees and min_leaf must be >= 1".into()));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::InvalidParameter("learning rate must be positive".into()));
    }
    if !(params.col_subsample > 0.0 && params.col_subsample <= 1.0) {
        return Err(Error::InvalidParameter("col_subsample outside (0, 1]".into()));
    }
    let m = y.len();
    let p = x.cols();
    let base_score = y.iter().sum::<f64>() / m as f64;
    let data = PresortedData::new(x);
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        feature_subset_ratio: 1.0,
    };
    let k = subset_size(p, params.col_subsample);
    let mut pred = alloc::vec![base_score; m];
    let mut resid: Vec<f64> = y.iter().map(|v| v - base_score).collect();
    let mut stage_mse = Vec::with_capacity(params.n_trees + 1);
    stage_mse.push(mse(&resid));
    let mut trees = Vec::with_capacity(params.n_trees);
    for stage in 0..params.n_trees {
        let mut r = rng::rng_from_seed(rng::derive_seed(seed, &[0x6B, stage as u64]));
        let features = if k >= p {
            (0..p).collect()
        } else {
            rng::sample_indices(&mut r, p, k)
        };
        let tree = grow_tree(&data, &resid, None, &features, tree_params, r);
        for i in 0..m {
            pred[i] += params.learning_rate * tree.predict_row(x.row(i));
            resid[i] = y[i] - pred[i];
        }
        stage_mse.push(mse(&resid));
        trees.push(tree);
    }
    Ok(GbrtFit {
        model: BoostedTrees {
            base_score,
            learning_rate: params.learning_rate,
            trees,
        },
        stage_mse,
    })
}

fn mse(resid: &[f64]) -> f64 {
    resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn two_stage_hand_trace() {
        // x = 0,1,2,3; y = 0,0,4,8; learning rate 1, stumps.
        // base 3, residuals -3,-3,1,5 -> split at 1.5, leaves -3 and 3.
        // residuals 0,0,-2,2 -> split at 2.5, leaves -2/3 and 2.
        let x = Matrix::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let y = [0.0, 0.0, 4.0, 8.0];
        let m = fit_gbrt(&x, &y, &GbrtParams::new(2, 1, 1.0, 1.0), 0).unwrap();
        let p = m.predict(&x);
        let expect = [-2.0 / 3.0, -2.0 / 3.0, 16.0 / 3.0, 8.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn stage_mse_non_increasing() {
        let rows: Vec<Vec<f64>> = (0..150).map(|i| vec![(i as f64 * 0.3).sin(), (i % 11) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1] + 0.3 * r[1]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        for (lr, col) in [(0.1, 1.0), (0.5, 0.5), (1.0, 1.0)] {
            let f = fit_gbrt_traced(&x, &y, &GbrtParams::new(40, 3, lr, col), 5).unwrap();
            for w in f.stage_mse.windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * w[0].max(1.0));
            }
        }
    }

    #[test]
    fn tiny_rate_stays_near_mean() {
        let x = Matrix::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let y = [0.0, 0.0, 4.0, 8.0];
        let m = fit_gbrt(&x, &y, &GbrtParams::new(10, 2, 1e-9, 1.0), 0).unwrap();
        for v in m.predict(&x) {
            assert!((v - 3.0).abs() < 1e-6);
        }
    }
}
