//! Two-layer stacking: K-fold out-of-fold base predictions feed a linear
//! meta-model; base models are refit on all training rows for inference.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{Hyperparameters, Predictor, RegressorConfig, TrainedRegressor};
use crate::matrix::{cholesky_solve, Matrix};
use crate::{par, rng};

pub const DEFAULT_FOLDS: usize = 5;
const META_PIVOT_TOL: f64 = 1e-10;

/// Default bases: random forest and gradient boosting.
pub fn default_base_configs(seed: u64) -> Vec<RegressorConfig> {
    vec![
        RegressorConfig::new(Hyperparameters::random_forest(300, 7, 4), rng::derive_seed(seed, &[1])),
        RegressorConfig::new(
            Hyperparameters::Gbrt {
                n_trees: 300,
                max_depth: 5,
                learning_rate: 0.1,
                col_subsample: 0.8,
            },
            rng::derive_seed(seed, &[2]),
        ),
    ]
}

/// Shuffles the rows with `seed` and deals them round-robin into `k`
/// folds, so fold sizes differ by at most one.
pub fn fold_assignment(m: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter("need at least 2 folds".into()));
    }
    if m < k {
        return Err(Error::InsufficientData { needed: k, have: m });
    }
    let mut order: Vec<usize> = (0..m).collect();
    rng::shuffle(&mut rng::rng_from_seed(rng::derive_seed(seed, &[0xF01D])), &mut order);
    let mut fold = vec![0; m];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % k;
    }
    Ok(fold)
}

/// The model that produced one column block of out-of-fold predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldProducer {
    pub base: usize,
    pub fold: usize,
    pub training_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OofMatrix {
    /// `m x B` out-of-fold predictions.
    pub predictions: Matrix,
    pub fold_of_row: Vec<usize>,
    pub folds: usize,
    pub producers: Vec<FoldProducer>,
    /// `producer_of[i * B + b]` indexes `producers`.
    pub producer_of: Vec<usize>,
}

impl OofMatrix {
    pub fn n_bases(&self) -> usize {
        self.predictions.cols()
    }

    pub fn column(&self, b: usize) -> Vec<f64> {
        self.predictions.column(b)
    }

    /// Verifies that every entry was produced by a model whose training
    /// rows exclude the entry's whole fold.
    pub fn audit(&self) -> Result<()> {
        let m = self.predictions.rows();
        let nb = self.n_bases();
        if self.fold_of_row.len() != m || self.producer_of.len() != m * nb {
            return Err(Error::LengthMismatch {
                left: self.producer_of.len(),
                right: m * nb,
            });
        }
        let mut seen = vec![vec![false; m]; self.producers.len()];
        for (p, prod) in self.producers.iter().enumerate() {
            for &r in &prod.training_rows {
                if r >= m || self.fold_of_row[r] == prod.fold {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "producer {p} trained on row {r} of its own fold"
                    )));
                }
                seen[p][r] = true;
            }
        }
        for i in 0..m {
            for b in 0..nb {
                let p = self.producer_of[i * nb + b];
                let prod = self.producers.get(p).ok_or(Error::Undefined("producer index"))?;
                if prod.base != b || prod.fold != self.fold_of_row[i] || seen[p][i] {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "row {i}, base {b}: prediction from a model that saw the row"
                    )));
                }
                if !self.predictions.get(i, b).is_finite() {
                    return Err(Error::NonFinite {
                        index: i,
                        field: "out-of-fold prediction",
                    });
                }
            }
        }
        Ok(())
    }
}

fn fold_seed(seed: u64, base: usize, fold: usize) -> u64 {
    rng::derive_seed(seed, &[0x57AC, base as u64, fold as u64])
}

/// Out-of-fold predictions for every base configuration. Configurations
/// are used as given (domains are checked by [`fit_stacked`]).
pub fn oof_predictions(
    x: &Matrix,
    y: &[f64],
    base_configs: &[RegressorConfig],
    k: usize,
    seed: u64,
) -> Result<OofMatrix> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if base_configs.is_empty() {
        return Err(Error::Empty("base models"));
    }
    let m = y.len();
    let fold_of_row = fold_assignment(m, k, seed)?;
    let nb = base_configs.len();
    let jobs: Vec<(usize, usize)> = (0..nb).flat_map(|b| (0..k).map(move |f| (b, f))).collect();
    let results = par::map(jobs, |(b, f)| -> Result<(FoldProducer, Vec<(usize, f64)>)> {
        let train: Vec<usize> = (0..m).filter(|&i| fold_of_row[i] != f).collect();
        let held: Vec<usize> = (0..m).filter(|&i| fold_of_row[i] == f).collect();
        let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let cfg = base_configs[b].with_seed(fold_seed(seed, b, f));
        let model = cfg.fit_unchecked(&x.select_rows(&train), &ytr)?;
        let preds = held.iter().map(|&i| (i, model.predict_row_unchecked(x.row(i)))).collect();
        Ok((
            FoldProducer {
                base: b,
                fold: f,
                training_rows: train,
            },
            preds,
        ))
    });
    let mut predictions = Matrix::zeros(m, nb);
    let mut producer_of = vec![usize::MAX; m * nb];
    let mut producers = Vec::with_capacity(results.len());
    for r in results {
        let (prod, preds) = r?;
        let p = producers.len();
        for (i, v) in preds {
            predictions.set(i, prod.base, v);
            producer_of[i * nb + prod.base] = p;
        }
        producers.push(prod);
    }
    Ok(OofMatrix {
        predictions,
        fold_of_row,
        folds: k,
        producers,
        producer_of,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
    /// Set when the design was singular and equal weights were used.
    pub fallback: bool,
}

impl MetaModel {
    pub fn combine(&self, base_predictions: &[f64]) -> f64 {
        let mut s = self.intercept;
        for (c, p) in self.coef.iter().zip(base_predictions) {
            s += c * p;
        }
        s
    }
}

/// Ordinary least squares with intercept on the base-prediction columns.
/// A singular design falls back to an equal-weight average.
pub fn fit_meta(z: &Matrix, y: &[f64]) -> Result<MetaModel> {
    let m = z.rows();
    let nb = z.cols();
    if m != y.len() {
        return Err(Error::LengthMismatch { left: m, right: y.len() });
    }
    if m == 0 || nb == 0 {
        return Err(Error::Empty("meta design"));
    }
    let fallback = MetaModel {
        coef: vec![1.0 / nb as f64; nb],
        intercept: 0.0,
        fallback: true,
    };
    let y_mean = y.iter().sum::<f64>() / m as f64;
    let means: Vec<f64> = (0..nb).map(|b| (0..m).map(|i| z.get(i, b)).sum::<f64>() / m as f64).collect();
    let mut g = Matrix::zeros(nb, nb);
    let mut rhs = vec![0.0; nb];
    for i in 0..m {
        let row = z.row(i);
        let yc = y[i] - y_mean;
        for a in 0..nb {
            let za = row[a] - means[a];
            rhs[a] += za * yc;
            for c in a..nb {
                g.set(a, c, g.get(a, c) + za * (row[c] - means[c]));
            }
        }
    }
    for a in 0..nb {
        for c in 0..a {
            g.set(a, c, g.get(c, a));
        }
    }
    let Some(coef) = cholesky_solve(&g, &rhs, META_PIVOT_TOL) else {
        return Ok(fallback);
    };
    if coef.iter().any(|c| !c.is_finite()) {
        return Ok(fallback);
    }
    let intercept = y_mean - means.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>();
    Ok(MetaModel {
        coef,
        intercept,
        fallback: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    pub base_configs: Vec<RegressorConfig>,
    pub folds: usize,
    pub seed: u64,
    pub bases: Vec<TrainedRegressor>,
    pub meta: MetaModel,
    /// MSE of each base's out-of-fold column on the training rows.
    pub base_oof_mse: Vec<f64>,
    /// MSE of the meta-model on the out-of-fold design.
    pub oof_meta_mse: f64,
}

fn mse(y: &[f64], p: &[f64]) -> f64 {
    y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}

pub fn fit_stacked(
    x: &Matrix,
    y: &[f64],
    base_configs: &[RegressorConfig],
    k: usize,
    seed: u64,
) -> Result<StackedModel> {
    for c in base_configs {
        c.validate()?;
    }
    fit_stacked_unchecked(x, y, base_configs, k, seed)
}

/// As [`fit_stacked`] without checking base hyperparameter domains.
pub fn fit_stacked_unchecked(
    x: &Matrix,
    y: &[f64],
    base_configs: &[RegressorConfig],
    k: usize,
    seed: u64,
) -> Result<StackedModel> {
    let oof = oof_predictions(x, y, base_configs, k, seed)?;
    let meta = fit_meta(&oof.predictions, y)?;
    let base_oof_mse = (0..oof.n_bases()).map(|b| mse(y, &oof.column(b))).collect();
    let meta_pred: Vec<f64> = (0..y.len()).map(|i| meta.combine(oof.predictions.row(i))).collect();
    let oof_meta_mse = mse(y, &meta_pred);
    let jobs: Vec<usize> = (0..base_configs.len()).collect();
    let bases = par::map(jobs, |b| {
        base_configs[b]
            .with_seed(fold_seed(seed, b, usize::MAX))
            .fit_unchecked(x, y)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(StackedModel {
        base_configs: base_configs.to_vec(),
        folds: k,
        seed,
        bases,
        meta,
        base_oof_mse,
        oof_meta_mse,
    })
}

impl StackedModel {
    pub fn base_predictions_row(&self, x: &[f64]) -> Vec<f64> {
        self.bases.iter().map(|b| b.predict_row_unchecked(x)).collect()
    }
}

impl Predictor for StackedModel {
    fn n_features(&self) -> usize {
        self.bases.first().map_or(0, |b| b.n_features)
    }

    fn predict_row_unchecked(&self, x: &[f64]) -> f64 {
        let mut s = self.meta.intercept;
        for (c, b) in self.meta.coef.iter().zip(&self.bases) {
            s += c * b.predict_row_unchecked(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Hyperparameters;

    #[test]
    fn equal_fold_sizes() {
        let f = fold_assignment(100, 5, 3).unwrap();
        for k in 0..5 {
            assert_eq!(f.iter().filter(|&&v| v == k).count(), 20);
        }
        assert!(fold_assignment(4, 5, 0).is_err());
        assert!(fold_assignment(10, 1, 0).is_err());
    }

    #[test]
    fn perfect_base_gives_identity_meta() {
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin() * 50.0 + 200.0).collect();
        let z = Matrix::new(30, 1, y.clone()).unwrap();
        let meta = fit_meta(&z, &y).unwrap();
        assert!(!meta.fallback);
        assert!((meta.coef[0] - 1.0).abs() < 1e-6);
        assert!(meta.intercept.abs() < 1e-6);
    }

    #[test]
    fn identical_bases_fall_back() {
        let y: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let p: Vec<f64> = y.iter().map(|v| v * 0.9 + 1.0).collect();
        let z = Matrix::from_columns(&[p.clone(), p]).unwrap();
        let meta = fit_meta(&z, &y).unwrap();
        assert!(meta.fallback);
        assert_eq!(meta.coef, vec![0.5, 0.5]);
        assert_eq!(meta.intercept, 0.0);
    }

    #[test]
    fn linear_combination() {
        let meta = MetaModel {
            coef: vec![0.5, 0.5],
            intercept: 0.0,
            fallback: false,
        };
        assert_eq!(meta.combine(&[100.0, 200.0]), 150.0);
    }

    #[test]
    fn loo_and_audit() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..10).map(|i| i as f64 * 2.0).collect();
        let cfg = RegressorConfig::new(Hyperparameters::ElasticNet { alpha: 0.0, l1_ratio: 0.1 }, 0);
        let oof = oof_predictions(&x, &y, &[cfg], 10, 1).unwrap();
        assert_eq!(oof.producers.len(), 10);
        for p in &oof.producers {
            assert_eq!(p.training_rows.len(), 9);
        }
        oof.audit().unwrap();
        let mut bad = oof.clone();
        bad.producers[0].training_rows.push(bad.fold_of_row.iter().position(|&f| f == 0).unwrap());
        assert!(bad.audit().is_err());
    }
}
