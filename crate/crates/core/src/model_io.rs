//! Self-describing JSON model documents.
//!
//! Floats are written in shortest round-trip decimal form and parsed with
//! correct rounding, so every 64-bit value survives save/load unchanged.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::network::{LayerSpec, Network};
use crate::regularizer::RegCoefficients;
use crate::trainer::{Mode, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    /// Redundant with the weights; checked on load.
    pub layer_specs: Vec<LayerSpec>,
    pub network: Network,
    /// Learned coefficients; present only for `rln` models.
    pub coefficients: Option<RegCoefficients>,
    pub config: TrainConfig,
    pub seed: u64,
    pub feature_names: Vec<String>,
    /// Input standardization fitted at training time, if any.
    pub scaler: Option<Scaler>,
}

impl ModelDocument {
    pub fn new(
        network: Network,
        coefficients: Option<RegCoefficients>,
        config: TrainConfig,
        feature_names: Vec<String>,
        scaler: Option<Scaler>,
    ) -> Result<Self> {
        let coefficients = if config.mode == Mode::Rln { coefficients } else { None };
        let doc = Self {
            format_version: FORMAT_VERSION,
            layer_specs: network.specs(),
            seed: config.seed,
            network,
            coefficients,
            config,
            feature_names,
            scaler,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.network.validate()?;
        if self.layer_specs != self.network.specs() {
            return Err(Error::Format("layer specs disagree with weight shapes".to_owned()));
        }
        if self.seed != self.config.seed {
            return Err(Error::Format("seed disagrees with training config".to_owned()));
        }
        match (&self.coefficients, self.config.mode) {
            (Some(c), Mode::Rln) => c.validate(&self.network)?,
            (None, Mode::Rln) => return Err(Error::Format("rln model without coefficients".to_owned())),
            (Some(_), _) => return Err(Error::Format("coefficients present on a non-rln model".to_owned())),
            (None, _) => {}
        }
        let d = self.network.input_width();
        if !self.feature_names.is_empty() && self.feature_names.len() != d {
            return Err(Error::Format(format!(
                "{} feature names for {d} inputs",
                self.feature_names.len()
            )));
        }
        if let Some(s) = &self.scaler {
            if s.mean.len() != d || s.std.len() != d {
                return Err(Error::Format("scaler width disagrees with network input".to_owned()));
            }
            if s.mean.iter().chain(&s.std).any(|v| !v.is_finite()) || s.std.iter().any(|v| *v <= 0.0) {
                return Err(Error::Format("scaler holds invalid values".to_owned()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
