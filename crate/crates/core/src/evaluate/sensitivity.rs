//! Data-size sensitivity: test R² versus training-set size under repeated
//! random subsampling.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use super::{mean_std, r2};
use crate::error::{Error, Result};
use crate::learners::{Hyperparameters, Predictor, RegressorConfig, Variant};
use crate::matrix::Matrix;
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityConfig {
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub train_fraction: f64,
    pub models: Vec<RegressorConfig>,
    pub seed: u64,
}

/// Fixed settings used for every subsample size.
pub fn empirical_configs(seed: u64) -> Vec<RegressorConfig> {
    let h = [
        Hyperparameters::ElasticNet {
            alpha: 0.1,
            l1_ratio: 0.01,
        },
        Hyperparameters::random_forest(300, 7, 4),
        Hyperparameters::Gbrt {
            n_trees: 300,
            max_depth: 5,
            learning_rate: 0.1,
            col_subsample: 0.8,
        },
    ];
    h.iter()
        .enumerate()
        .map(|(i, &h)| RegressorConfig::new(h, rng::derive_seed(seed, &[0x5E45, i as u64])))
        .collect()
}

impl SensitivityConfig {
    /// Sizes 100..=4500 in steps of 100, 50 repetitions, 70/30 splits.
    pub fn standard(seed: u64) -> Self {
        Self {
            sizes: (1..=45).map(|k| k * 100).collect(),
            repetitions: 50,
            train_fraction: 0.7,
            models: empirical_configs(seed),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.repetitions == 0 || self.models.is_empty() {
            return Err(Error::InvalidParameter("sizes, repetitions and models must be non-empty".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter("train fraction outside (0, 1)".into()));
        }
        if self.sizes.iter().any(|&n| n < 4) {
            return Err(Error::InvalidParameter("subsample sizes must be >= 4".into()));
        }
        for m in &self.models {
            m.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub size: usize,
    pub r2: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub variant: Variant,
    pub config: RegressorConfig,
    pub points: Vec<SensitivityPoint>,
}

impl SensitivityCurve {
    pub fn at(&self, size: usize) -> Option<&SensitivityPoint> {
        self.points.iter().find(|p| p.size == size)
    }
}

/// Train/test row indices for one repetition at one size.
pub fn subsample_split(m: usize, n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut r = rng::rng_from_seed(seed);
    let mut rows = rng::sample_indices(&mut r, m, n);
    rng::shuffle(&mut r, &mut rows);
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let test = rows.split_off(n_train);
    (rows, test)
}

pub fn sensitivity_study(x: &Matrix, y: &[f64], cfg: &SensitivityConfig) -> Result<Vec<SensitivityCurve>> {
    cfg.validate()?;
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    let needed = *cfg.sizes.iter().max().expect("validated non-empty");
    if y.len() < needed {
        return Err(Error::InsufficientData { needed, have: y.len() });
    }
    let reps = cfg.repetitions;
    let jobs: Vec<(usize, usize)> = (0..cfg.sizes.len()).flat_map(|s| (0..reps).map(move |r| (s, r))).collect();
    let results = par::map(jobs, |(s, rep)| -> Result<Vec<f64>> {
        let n = cfg.sizes[s];
        let seed = rng::derive_seed(cfg.seed, &[n as u64, rep as u64]);
        let (train, test) = subsample_split(y.len(), n, cfg.train_fraction, seed);
        let xt = x.select_rows(&train);
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let xv = x.select_rows(&test);
        let yv: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        cfg.models
            .iter()
            .enumerate()
            .map(|(mi, c)| {
                let c = c.with_seed(rng::derive_seed(c.seed, &[n as u64, rep as u64, mi as u64]));
                let model = c.fit_unchecked(&xt, &yt)?;
                r2(&yv, &model.predict(&xv)?)
            })
            .collect()
    });
    let results: Vec<Vec<f64>> = results.into_iter().collect::<Result<_>>()?;
    let curves = cfg
        .models
        .iter()
        .enumerate()
        .map(|(mi, c)| {
            let points = cfg
                .sizes
                .iter()
                .enumerate()
                .map(|(s, &size)| {
                    let r2: Vec<f64> = (0..reps).map(|rep| results[s * reps + rep][mi]).collect();
                    let (mean, std) = mean_std(&r2);
                    SensitivityPoint { size, r2, mean, std }
                })
                .collect();
            SensitivityCurve {
                variant: c.variant(),
                config: *c,
                points,
            }
        })
        .collect();
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsample_split_sizes() {
        let (a, b) = subsample_split(1000, 300, 0.7, 4);
        assert_eq!((a.len(), b.len()), (210, 90));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 300);
    }

    #[test]
    fn bookkeeping_counts() {
        let rows: Vec<Vec<f64>> = (0..300).map(|i| vec![(i as f64 * 0.1).sin(), (i % 13) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] + r[1] * 0.2).collect();
        let cfg = SensitivityConfig {
            sizes: vec![100, 200],
            repetitions: 3,
            train_fraction: 0.7,
            models: vec![RegressorConfig::new(
                Hyperparameters::ElasticNet {
                    alpha: 0.1,
                    l1_ratio: 0.01,
                },
                0,
            )],
            seed: 1,
        };
        let c = sensitivity_study(&x, &y, &cfg).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].points.len(), 2);
        assert!(c[0].points.iter().all(|p| p.r2.len() == 3));
        let mut big = cfg.clone();
        big.sizes = vec![400];
        assert!(matches!(sensitivity_study(&x, &y, &big), Err(Error::InsufficientData { .. })));
    }
}
