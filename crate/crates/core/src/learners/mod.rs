//! The four base regressors behind one configuration and prediction
//! contract.

pub mod elastic_net;
pub mod forest;
pub mod gbrt;
pub mod mlp;
pub mod tree;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Standardizer};
use elastic_net::LinearModel;
use forest::{ForestParams, RandomForest, DEFAULT_MAX_FEATURES};
use gbrt::{BoostedTrees, GbrtParams};
use mlp::{MlpModel, MlpParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "EN")]
    ElasticNet,
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "GBRT")]
    Gbrt,
    #[serde(rename = "MLP")]
    Mlp,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::ElasticNet, Variant::RandomForest, Variant::Gbrt, Variant::Mlp];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::ElasticNet => "EN",
            Variant::RandomForest => "RF",
            Variant::Gbrt => "GBRT",
            Variant::Mlp => "MLP",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "elastic-net" | "elastic_net" | "elasticnet" => Ok(Variant::ElasticNet),
            "rf" | "random-forest" | "random_forest" | "randomforest" => Ok(Variant::RandomForest),
            "gbrt" | "xgboost" | "gradient-boosting" => Ok(Variant::Gbrt),
            "mlp" => Ok(Variant::Mlp),
            _ => Err(Error::InvalidParameter(format!("unknown model variant `{s}`"))),
        }
    }
}

fn default_max_features() -> f64 {
    DEFAULT_MAX_FEATURES
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum Hyperparameters {
    #[serde(rename = "EN")]
    ElasticNet { alpha: f64, l1_ratio: f64 },
    #[serde(rename = "RF")]
    RandomForest {
        n_trees: usize,
        max_depth: usize,
        min_leaf: usize,
        #[serde(default = "default_max_features")]
        max_features: f64,
    },
    #[serde(rename = "GBRT")]
    Gbrt {
        n_trees: usize,
        max_depth: usize,
        learning_rate: f64,
        col_subsample: f64,
    },
    #[serde(rename = "MLP")]
    Mlp {
        hidden_layers: usize,
        neurons: usize,
        batch_size: usize,
    },
}

pub const EN_L1_RATIOS: [f64; 3] = [1e-3, 1e-2, 1e-1];
pub const GBRT_LEARNING_RATES: [f64; 3] = [0.1, 0.3, 0.5];
pub const GBRT_COL_SUBSAMPLES: [f64; 3] = [0.5, 0.8, 1.0];
pub const MLP_BATCH_SIZES: [usize; 3] = [32, 64, 128];

fn out_of_domain(name: &str, value: impl ToString, domain: &str) -> Error {
    Error::OutOfDomain {
        name: name.to_string(),
        value: value.to_string(),
        domain: domain.to_string(),
    }
}

fn in_range(name: &str, v: usize, lo: usize, hi: usize) -> Result<()> {
    if v < lo || v > hi {
        return Err(out_of_domain(name, v, &format!("[{lo}, {hi}]")));
    }
    Ok(())
}

fn in_set(name: &str, v: f64, set: &[f64]) -> Result<()> {
    if !set.iter().any(|s| (s - v).abs() <= 1e-12 * s.abs().max(1.0)) {
        return Err(out_of_domain(name, v, &format!("{set:?}")));
    }
    Ok(())
}

impl Hyperparameters {
    pub fn variant(&self) -> Variant {
        match self {
            Hyperparameters::ElasticNet { .. } => Variant::ElasticNet,
            Hyperparameters::RandomForest { .. } => Variant::RandomForest,
            Hyperparameters::Gbrt { .. } => Variant::Gbrt,
            Hyperparameters::Mlp { .. } => Variant::Mlp,
        }
    }

    pub fn random_forest(n_trees: usize, max_depth: usize, min_leaf: usize) -> Self {
        Hyperparameters::RandomForest {
            n_trees,
            max_depth,
            min_leaf,
            max_features: DEFAULT_MAX_FEATURES,
        }
    }

    /// Checks the tuning domains of each variant.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Hyperparameters::ElasticNet { alpha, l1_ratio } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(out_of_domain("alpha", alpha, "[0, 1]"));
                }
                in_set("l1_ratio", l1_ratio, &EN_L1_RATIOS)
            }
            Hyperparameters::RandomForest {
                n_trees,
                max_depth,
                min_leaf,
                max_features,
            } => {
                in_range("n_trees", n_trees, 100, 1000)?;
                in_range("max_depth", max_depth, 2, 7)?;
                in_range("min_leaf", min_leaf, 1, 64)?;
                if !(max_features > 0.0 && max_features <= 1.0) {
                    return Err(out_of_domain("max_features", max_features, "(0, 1]"));
                }
                Ok(())
            }
            Hyperparameters::Gbrt {
                n_trees,
                max_depth,
                learning_rate,
                col_subsample,
            } => {
                in_range("n_trees", n_trees, 100, 1000)?;
                in_range("max_depth", max_depth, 2, 7)?;
                in_set("learning_rate", learning_rate, &GBRT_LEARNING_RATES)?;
                in_set("col_subsample", col_subsample, &GBRT_COL_SUBSAMPLES)
            }
            Hyperparameters::Mlp {
                hidden_layers,
                neurons,
                batch_size,
            } => {
                in_range("hidden_layers", hidden_layers, 1, 3)?;
                in_range("neurons", neurons, 2, 256)?;
                if !MLP_BATCH_SIZES.contains(&batch_size) {
                    return Err(out_of_domain("batch_size", batch_size, "{32, 64, 128}"));
                }
                Ok(())
            }
        }
    }

    /// Ordering key where smaller means simpler: fewer trees, then
    /// shallower, then larger leaves or fewer neurons.
    pub fn complexity_key(&self) -> (usize, usize, i64, usize) {
        match *self {
            Hyperparameters::ElasticNet { .. } => (0, 0, 0, 0),
            Hyperparameters::RandomForest {
                n_trees,
                max_depth,
                min_leaf,
                ..
            } => (n_trees, max_depth, -(min_leaf as i64), 0),
            Hyperparameters::Gbrt { n_trees, max_depth, .. } => (n_trees, max_depth, 0, 0),
            Hyperparameters::Mlp {
                hidden_layers, neurons, ..
            } => (0, hidden_layers, 0, neurons),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Hyperparameters::ElasticNet { alpha, l1_ratio } => format!("EN(alpha={alpha}, l1_ratio={l1_ratio})"),
            Hyperparameters::RandomForest {
                n_trees,
                max_depth,
                min_leaf,
                ..
            } => format!("RF(trees={n_trees}, depth={max_depth}, min_leaf={min_leaf})"),
            Hyperparameters::Gbrt {
                n_trees,
                max_depth,
                learning_rate,
                col_subsample,
            } => format!("GBRT(trees={n_trees}, depth={max_depth}, lr={learning_rate}, col={col_subsample})"),
            Hyperparameters::Mlp {
                hidden_layers,
                neurons,
                batch_size,
            } => format!("MLP(layers={hidden_layers}, neurons={neurons}, batch={batch_size})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl RegressorConfig {
    pub fn new(hyperparameters: Hyperparameters, seed: u64) -> Self {
        Self { hyperparameters, seed }
    }

    pub fn variant(&self) -> Variant {
        self.hyperparameters.variant()
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparameters.validate()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Validates the configuration, then fits.
    pub fn fit(&self, x: &Matrix, y: &[f64]) -> Result<TrainedRegressor> {
        self.validate()?;
        self.fit_unchecked(x, y)
    }

    /// Fits without checking the tuning domains (used for tests and
    /// diagnostics with deliberately small or extreme settings).
    pub fn fit_unchecked(&self, x: &Matrix, y: &[f64]) -> Result<TrainedRegressor> {
        let seed = self.seed;
        let standardize = matches!(self.variant(), Variant::ElasticNet | Variant::Mlp);
        let standardizer = standardize.then(|| Standardizer::fit(x));
        let xs;
        let xin = match &standardizer {
            Some(s) => {
                xs = s.transform(x);
                &xs
            }
            None => x,
        };
        let parameters = match self.hyperparameters {
            Hyperparameters::ElasticNet { alpha, l1_ratio } => {
                Parameters::ElasticNet(elastic_net::fit_elastic_net(xin, y, alpha, l1_ratio)?.model)
            }
            Hyperparameters::RandomForest {
                n_trees,
                max_depth,
                min_leaf,
                max_features,
            } => {
                let p = ForestParams {
                    n_trees,
                    max_depth,
                    min_leaf,
                    max_features,
                    bootstrap: true,
                };
                Parameters::RandomForest(forest::fit_random_forest(xin, y, &p, seed)?)
            }
            Hyperparameters::Gbrt {
                n_trees,
                max_depth,
                learning_rate,
                col_subsample,
            } => {
                let p = GbrtParams::new(n_trees, max_depth, learning_rate, col_subsample);
                Parameters::Gbrt(gbrt::fit_gbrt(xin, y, &p, seed)?)
            }
            Hyperparameters::Mlp {
                hidden_layers,
                neurons,
                batch_size,
            } => {
                let p = MlpParams::new(hidden_layers, neurons, batch_size);
                Parameters::Mlp(mlp::fit_mlp(xin, y, &p, seed)?.model)
            }
        };
        Ok(TrainedRegressor {
            config: *self,
            n_features: x.cols(),
            standardizer,
            parameters,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameters {
    ElasticNet(LinearModel),
    RandomForest(RandomForest),
    Gbrt(BoostedTrees),
    Mlp(MlpModel),
}

impl Parameters {
    fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            Parameters::ElasticNet(m) => m.predict_row(x),
            Parameters::RandomForest(m) => m.predict_row(x),
            Parameters::Gbrt(m) => m.predict_row(x),
            Parameters::Mlp(m) => m.predict_row(x),
        }
    }
}

/// Anything that maps feature rows to power predictions.
pub trait Predictor {
    fn n_features(&self) -> usize;

    /// Prediction for one row whose length is already checked.
    fn predict_row_unchecked(&self, x: &[f64]) -> f64;

    fn predict_row(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::ColumnMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(self.predict_row_unchecked(x))
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::ColumnMismatch {
                expected: self.n_features(),
                got: x.cols(),
            });
        }
        Ok((0..x.rows()).map(|i| self.predict_row_unchecked(x.row(i))).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRegressor {
    pub config: RegressorConfig,
    pub n_features: usize,
    pub standardizer: Option<Standardizer>,
    pub parameters: Parameters,
}

impl TrainedRegressor {
    pub fn variant(&self) -> Variant {
        self.config.variant()
    }
}

impl Predictor for TrainedRegressor {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_row_unchecked(&self, x: &[f64]) -> f64 {
        match &self.standardizer {
            Some(s) => {
                let mut row = x.to_vec();
                s.transform_in_place(&mut row);
                self.parameters.predict_row(&row)
            }
            None => self.parameters.predict_row(x),
        }
    }
}

/// Fits with validated hyperparameters.
pub fn fit(config: &RegressorConfig, x: &Matrix, y: &[f64]) -> Result<TrainedRegressor> {
    config.fit(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn domains_enforced() {
        let bad = [
            Hyperparameters::ElasticNet { alpha: 1.5, l1_ratio: 0.01 },
            Hyperparameters::ElasticNet { alpha: 0.5, l1_ratio: 0.5 },
            Hyperparameters::random_forest(50, 3, 1),
            Hyperparameters::random_forest(100, 8, 1),
            Hyperparameters::random_forest(100, 3, 65),
            Hyperparameters::Gbrt {
                n_trees: 100,
                max_depth: 3,
                learning_rate: 0.2,
                col_subsample: 1.0,
            },
            Hyperparameters::Mlp {
                hidden_layers: 0,
                neurons: 8,
                batch_size: 32,
            },
            Hyperparameters::Mlp {
                hidden_layers: 4,
                neurons: 8,
                batch_size: 32,
            },
            Hyperparameters::Mlp {
                hidden_layers: 1,
                neurons: 300,
                batch_size: 32,
            },
            Hyperparameters::Mlp {
                hidden_layers: 1,
                neurons: 8,
                batch_size: 16,
            },
        ];
        for h in bad {
            assert!(matches!(h.validate(), Err(Error::OutOfDomain { .. })), "{h:?}");
        }
        let e = Hyperparameters::random_forest(100, 9, 1).validate().unwrap_err();
        assert!(matches!(e, Error::OutOfDomain { ref name, .. } if name == "max_depth"));
        assert!(Hyperparameters::ElasticNet { alpha: 0.0, l1_ratio: 0.1 }.validate().is_ok());
    }

    #[test]
    fn hyperparameters_serde_tagged() {
        let h = Hyperparameters::Gbrt {
            n_trees: 300,
            max_depth: 5,
            learning_rate: 0.1,
            col_subsample: 0.8,
        };
        assert_eq!(h.variant(), Variant::Gbrt);
        assert_eq!("gbrt".parse::<Variant>().unwrap(), Variant::Gbrt);
        assert!("svm".parse::<Variant>().is_err());
    }

    #[test]
    fn column_mismatch_rejected() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 5.0]]).unwrap();
        let cfg = RegressorConfig::new(Hyperparameters::ElasticNet { alpha: 0.0, l1_ratio: 0.1 }, 0);
        let m = cfg.fit(&x, &[1.0, 2.0, 3.0]).unwrap();
        let wrong = Matrix::zeros(2, 3);
        assert_eq!(
            m.predict(&wrong).unwrap_err(),
            Error::ColumnMismatch { expected: 2, got: 3 }
        );
    }
}
