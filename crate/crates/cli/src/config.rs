//! On-disk run configuration (TOML). Every section and key is optional;
//! resolution applies command-line flags over file values over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use rln_core::data::{MissingPolicy, SynthConfig};
use rln_core::experiment::{BenchmarkConfig, Grid};
use rln_core::network::Activation;
use rln_core::regularizer::Norm;
use rln_core::trainer::{Mode, TrainConfig, WeightUpdate};
use rln_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub target: String,
    pub missing: MissingPolicy,
    /// Train / validation / test fractions.
    pub split: (f64, f64, f64),
    pub split_seed: u64,
    pub standardize: bool,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            path: None,
            target: "y".to_owned(),
            missing: MissingPolicy::RejectRow,
            split: (0.8, 0.2, 0.0),
            split_seed: 0,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden: vec![50, 10],
            activation: Activation::Relu,
        }
    }
}

/// Training keys; unset keys take the defaults of the chosen mode and norm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub mode: Option<Mode>,
    pub norm: Option<Norm>,
    pub weight_update: Option<WeightUpdate>,
    pub eta: Option<f64>,
    pub nu: Option<f64>,
    pub theta: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub sparsity_epsilon: Option<f64>,
    pub trajectory_edges: Option<usize>,
}

impl TrainSection {
    pub fn resolve(&self) -> Result<TrainConfig> {
        let mode = self.mode.unwrap_or(Mode::Rln);
        let norm = self.norm.unwrap_or(if mode == Mode::Linear { Norm::L2 } else { Norm::L1 });
        let d = TrainConfig::new(mode, norm);
        let cfg = TrainConfig {
            eta: self.eta.unwrap_or(d.eta),
            nu: self.nu.unwrap_or(d.nu),
            theta: self.theta.unwrap_or(d.theta),
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            weight_update: self.weight_update.unwrap_or(d.weight_update),
            seed: self.seed.unwrap_or(d.seed),
            sparsity_epsilon: self.sparsity_epsilon.unwrap_or(d.sparsity_epsilon),
            trajectory_edges: self.trajectory_edges.unwrap_or(d.trajectory_edges),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config(cfg: &TrainConfig) -> Self {
        Self {
            mode: Some(cfg.mode),
            norm: Some(cfg.norm),
            weight_update: Some(cfg.weight_update),
            eta: Some(cfg.eta),
            nu: Some(cfg.nu),
            theta: Some(cfg.theta),
            epochs: Some(cfg.epochs),
            batch_size: Some(cfg.batch_size),
            seed: Some(cfg.seed),
            sparsity_epsilon: Some(cfg.sparsity_epsilon),
            trajectory_edges: Some(cfg.trajectory_edges),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Configuration for `synth`, `train` and `grid-search`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub synth: SynthConfig,
    pub data: DataSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub grid: Grid,
    pub output: OutputSection,
}

/// Configuration for `benchmark`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkFile {
    pub benchmark: BenchmarkConfig,
    pub output: OutputSection,
}

pub fn load_toml<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Format(format!("config serialization: {e}")))
}

/// Parses `relu`, `identity`, `leaky_relu` or `leaky_relu:<slope>`.
pub fn parse_activation(s: &str) -> std::result::Result<Activation, String> {
    match s.split_once(':') {
        None if s == "relu" => Ok(Activation::Relu),
        None if s == "identity" => Ok(Activation::Identity),
        None if s == "leaky_relu" => Ok(Activation::LeakyRelu { slope: 0.01 }),
        Some(("leaky_relu", slope)) => slope
            .parse()
            .map(|slope| Activation::LeakyRelu { slope })
            .map_err(|e| format!("bad slope '{slope}': {e}")),
        _ => Err(format!("unknown activation '{s}'")),
    }
}

pub fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_norm(s: &str) -> std::result::Result<Norm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_weight_update(s: &str) -> std::result::Result<WeightUpdate, String> {
    match s {
        "proximal" => Ok(WeightUpdate::Proximal),
        "subgradient" => Ok(WeightUpdate::Subgradient),
        _ => Err(format!("unknown weight update '{s}' (proximal|subgradient)")),
    }
}

pub fn parse_split(s: &str) -> std::result::Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("split needs three comma-separated fractions".to_owned());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|e| format!("bad fraction '{p}': {e}"))?;
    }
    Ok((v[0], v[1], v[2]))
}
