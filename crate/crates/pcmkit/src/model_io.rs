//! Versioned JSON model documents.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pcmkit_core::sample::FEATURE_NAMES;
use pcmkit_core::{SplitSpec, TrainedModel};

use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "pcmkit-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub toolkit_version: String,
    pub features: Vec<String>,
    /// Flights that contributed rows to training.
    pub training_flights: BTreeSet<String>,
    pub split: Option<SplitSpec>,
    pub model: TrainedModel,
}

impl ModelDocument {
    pub fn new(model: TrainedModel, training_flights: BTreeSet<String>, split: Option<SplitSpec>) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            training_flights,
            split,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model documents serialize")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Head {
            format: String,
            version: u32,
        }
        let head: Head = serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
        if head.format != MODEL_FORMAT {
            return Err(Error::format(path, format!("not a model document (format `{}`)", head.format)));
        }
        if head.version != MODEL_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported model version {} (this build reads {MODEL_VERSION})", head.version),
            ));
        }
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
        if doc.features.iter().map(String::as_str).ne(FEATURE_NAMES) {
            return Err(Error::format(path, "feature list differs from this build"));
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}
