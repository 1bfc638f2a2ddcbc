//! A single regressor or a stacked ensemble behind one type.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learners::{Predictor, RegressorConfig, TrainedRegressor};
use crate::matrix::Matrix;
use crate::stacking::{self, StackedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Single { config: RegressorConfig },
    Stacked { bases: Vec<RegressorConfig>, folds: usize, seed: u64 },
}

impl ModelSpec {
    pub fn name(&self) -> String {
        match self {
            ModelSpec::Single { config } => String::from(config.variant().tag()),
            ModelSpec::Stacked { bases, .. } => {
                let tags: Vec<&str> = bases.iter().map(|b| b.variant().tag()).collect();
                alloc::format!("Stacked({})", tags.join("+"))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Single { config } => config.validate(),
            ModelSpec::Stacked { bases, .. } => bases.iter().try_for_each(RegressorConfig::validate),
        }
    }

    pub fn fit(&self, x: &Matrix, y: &[f64]) -> Result<TrainedModel> {
        match self {
            ModelSpec::Single { config } => Ok(TrainedModel::Single(config.fit(x, y)?)),
            ModelSpec::Stacked { bases, folds, seed } => Ok(TrainedModel::Stacked(stacking::fit_stacked(
                x, y, bases, *folds, *seed,
            )?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Single(TrainedRegressor),
    Stacked(StackedModel),
}

impl TrainedModel {
    pub fn name(&self) -> String {
        self.spec().name()
    }

    pub fn spec(&self) -> ModelSpec {
        match self {
            TrainedModel::Single(m) => ModelSpec::Single { config: m.config },
            TrainedModel::Stacked(s) => ModelSpec::Stacked {
                bases: s.base_configs.clone(),
                folds: s.folds,
                seed: s.seed,
            },
        }
    }
}

impl Predictor for TrainedModel {
    fn n_features(&self) -> usize {
        match self {
            TrainedModel::Single(m) => m.n_features(),
            TrainedModel::Stacked(s) => s.n_features(),
        }
    }

    fn predict_row_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            TrainedModel::Single(m) => m.predict_row_unchecked(x),
            TrainedModel::Stacked(s) => s.predict_row_unchecked(x),
        }
    }
}
