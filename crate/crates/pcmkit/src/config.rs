//! Run configuration: one TOML file, every field optional, flags win.
//!
//! ```toml
//! seed = 7
//!
//! [filter]
//! median_window = 5
//! power_floor = 20.0
//!
//! [split]
//! train_fraction = 0.7
//! mode = "random-by-flight"
//!
//! [train]
//! model = "stacked"            # or EN, RF, GBRT, MLP
//! folds = 5
//! bases = ["RF", "GBRT"]
//! [train.params.GBRT]
//! n_trees = 500
//!
//! [study.sensitivity]
//! sizes = [100, 200, 300]
//! repetitions = 10
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pcmkit_core::analysis::EnergyConfig;
use pcmkit_core::evaluate::grid::{GridSpec, DEFAULT_CV_FOLDS};
use pcmkit_core::preprocess::FilterConfig;
use pcmkit_core::rng::derive_seed;
use pcmkit_core::stacking::DEFAULT_FOLDS;
use pcmkit_core::synth::SynthConfig;
use pcmkit_core::{Hyperparameters, ModelSpec, RegressorConfig, SplitMode, SplitSpec, Variant};

use crate::error::{Error, Result};

pub type ParamTable = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub mode: SplitMode,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            mode: SplitMode::RandomBySample,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// `stacked` or a variant tag.
    pub model: String,
    pub folds: usize,
    pub bases: Vec<String>,
    /// Hyperparameter overrides keyed by variant tag.
    pub params: BTreeMap<String, ParamTable>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: "stacked".into(),
            folds: DEFAULT_FOLDS,
            bases: vec!["RF".into(), "GBRT".into()],
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneConfig {
    pub variant: Option<String>,
    pub folds: usize,
    /// Replaces the default grid of the tuned variant.
    pub grid: Option<GridSpec>,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            variant: None,
            folds: DEFAULT_CV_FOLDS,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivitySection {
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub train_fraction: f64,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        Self {
            sizes: (1..=45).map(|k| k * 100).collect(),
            repetitions: 50,
            train_fraction: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    /// Samples drawn per benchmark dataset.
    pub per_set: usize,
    /// Model names: variant tags and/or `stacked`.
    pub models: Vec<String>,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self {
            per_set: 3000,
            models: ["EN", "RF", "GBRT", "MLP", "stacked"].map(String::from).to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub sensitivity: SensitivitySection,
    pub histogram_bins: usize,
    pub energy: EnergyConfig,
    pub benchmark: BenchmarkSection,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            sensitivity: SensitivitySection::default(),
            histogram_bins: pcmkit_core::analysis::DEFAULT_HISTOGRAM_BINS,
            energy: EnergyConfig::default(),
            benchmark: BenchmarkSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub filter: FilterConfig,
    pub split: SplitConfig,
    pub train: TrainConfig,
    pub tune: TuneConfig,
    pub synth: SynthConfig,
    pub study: StudyConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.split.train_fraction,
            seed: derive_seed(self.seed, &[0x5911]),
            mode: self.split.mode,
        }
    }

    pub fn params_for(&self, v: Variant) -> ParamTable {
        self.train.params.get(v.tag()).cloned().unwrap_or_default()
    }

    /// The model a `train` run fits, with seeds derived from the run seed.
    pub fn model_spec(&self, model: &str) -> Result<ModelSpec> {
        if model.eq_ignore_ascii_case("stacked") {
            let bases = self
                .train
                .bases
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let v = parse_variant(b)?;
                    let h = hyperparameters(v, &self.params_for(v))?;
                    Ok(RegressorConfig::new(h, derive_seed(self.seed, &[0xBA5E, i as u64])))
                })
                .collect::<Result<Vec<_>>>()?;
            if bases.is_empty() {
                return Err(Error::Usage("stacking needs at least one base model".into()));
            }
            Ok(ModelSpec::Stacked {
                bases,
                folds: self.train.folds,
                seed: derive_seed(self.seed, &[0x57AC]),
            })
        } else {
            let v = parse_variant(model)?;
            let h = hyperparameters(v, &self.params_for(v))?;
            Ok(ModelSpec::Single {
                config: RegressorConfig::new(h, derive_seed(self.seed, &[0x5146, v as u64])),
            })
        }
    }
}

pub fn parse_variant(s: &str) -> Result<Variant> {
    s.parse().map_err(|e: pcmkit_core::Error| Error::Usage(e.to_string()))
}

/// Settings used when no override is given.
pub fn default_hyperparameters(v: Variant) -> Hyperparameters {
    match v {
        Variant::ElasticNet => Hyperparameters::ElasticNet {
            alpha: 0.1,
            l1_ratio: 0.01,
        },
        Variant::RandomForest => Hyperparameters::random_forest(300, 7, 4),
        Variant::Gbrt => Hyperparameters::Gbrt {
            n_trees: 300,
            max_depth: 5,
            learning_rate: 0.1,
            col_subsample: 0.8,
        },
        Variant::Mlp => Hyperparameters::Mlp {
            hidden_layers: 2,
            neurons: 32,
            batch_size: 32,
        },
    }
}

/// Defaults of `v` with `overrides` applied field by field.
pub fn hyperparameters(v: Variant, overrides: &ParamTable) -> Result<Hyperparameters> {
    let mut value = serde_json::to_value(default_hyperparameters(v)).expect("hyperparameters serialize");
    let obj = value.as_object_mut().expect("tagged struct");
    for (k, val) in overrides {
        if k == "variant" || !obj.contains_key(k) {
            return Err(Error::Usage(format!("{} has no hyperparameter `{k}`", v.tag())));
        }
        obj.insert(k.clone(), val.clone());
    }
    serde_json::from_value(value).map_err(|e| Error::Usage(format!("bad {} hyperparameter: {e}", v.tag())))
}

/// Parses `key=value` flag overrides; values are read as JSON scalars.
pub fn parse_param_flags(flags: &[String]) -> Result<ParamTable> {
    let mut out = ParamTable::new();
    for f in flags {
        let (k, v) = f
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected key=value, got `{f}`")))?;
        let val: serde_json::Value =
            serde_json::from_str(v.trim()).unwrap_or_else(|_| serde_json::Value::String(v.trim().into()));
        out.insert(k.trim().to_string(), val);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let c: RunConfig = toml::from_str("").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let c: RunConfig = toml::from_str(
            "seed = 3\n[split]\nmode = \"random-by-flight\"\n[train]\nmodel = \"GBRT\"\n[train.params.GBRT]\nn_trees = 500\n",
        )
        .unwrap();
        assert_eq!(c.split.mode, SplitMode::RandomByFlight);
        match c.model_spec(&c.train.model).unwrap() {
            ModelSpec::Single { config } => match config.hyperparameters {
                Hyperparameters::Gbrt { n_trees, max_depth, .. } => assert_eq!((n_trees, max_depth), (500, 5)),
                h => panic!("{h:?}"),
            },
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("sead = 1").is_err());
        let p = parse_param_flags(&["n_tree=5".into()]).unwrap();
        assert!(hyperparameters(Variant::RandomForest, &p).is_err());
    }
}
