//! Regularization learning: SGD on the regularized loss for the weights,
//! interleaved with SGD on the counterfactual loss for the per-weight
//! coefficients.
//!
//! One training step on batch `Z_t`:
//!
//! 1. `w_{t+1} = w_t - eta * (g_t + r_t)` (or its proximal l1 form),
//! 2. `g_{t+1}` is computed on `Z_{t+1}` at `W_{t+1}`,
//! 3. `lambda <- lambda + nu * eta * g_{t+1} * r_t`, then the mean-shift projection,
//! 4. `g_{t+1}` becomes the empirical gradient of the next weight step.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{mse_loss, Activation, Batch, GradientSet, LayerSpec, Network};
use crate::regularizer::{Norm, RegCoefficients, RegGradientSet};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Per-weight coefficients learned on the counterfactual loss.
    Rln,
    /// One shared coefficient `theta`, never updated.
    DnnUniform,
    /// Single identity layer with a shared l2 penalty.
    Linear,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Rln => "rln",
            Mode::DnnUniform => "dnn_uniform",
            Mode::Linear => "linear",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rln" => Ok(Mode::Rln),
            "dnn_uniform" | "dnn" => Ok(Mode::DnnUniform),
            "linear" | "lm" => Ok(Mode::Linear),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightUpdate {
    Subgradient,
    /// Soft-thresholding step; l1 only.
    Proximal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub eta: f64,
    pub nu: f64,
    pub theta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub norm: Norm,
    pub mode: Mode,
    pub weight_update: WeightUpdate,
    pub seed: u64,
    /// Weights with `|w| <= sparsity_epsilon` count as zero in reports.
    pub sparsity_epsilon: f64,
    /// Number of first-layer edges whose `(w, lambda)` path is recorded.
    #[serde(default = "default_trajectory_edges")]
    pub trajectory_edges: usize,
}

fn default_trajectory_edges() -> usize {
    16
}

impl TrainConfig {
    /// Defaults for a mode and norm; l1 uses the proximal update.
    pub fn new(mode: Mode, norm: Norm) -> Self {
        Self {
            eta: 1e-2,
            nu: if mode == Mode::Rln { 1e4 } else { 0.0 },
            theta: -6.0,
            epochs: 100,
            batch_size: 32,
            norm,
            mode,
            weight_update: match norm {
                Norm::L1 => WeightUpdate::Proximal,
                Norm::L2 => WeightUpdate::Subgradient,
            },
            seed: 0,
            sparsity_epsilon: 0.0,
            trajectory_edges: default_trajectory_edges(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(Error::Config(format!("nu must be nonnegative, got {}", self.nu)));
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("theta must be finite".to_owned()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".to_owned()));
        }
        if !(self.sparsity_epsilon.is_finite() && self.sparsity_epsilon >= 0.0) {
            return Err(Error::Config("sparsity_epsilon must be nonnegative".to_owned()));
        }
        if self.weight_update == WeightUpdate::Proximal && self.norm != Norm::L1 {
            return Err(Error::Config("the proximal update requires the l1 norm".to_owned()));
        }
        if self.mode == Mode::Linear && self.norm != Norm::L2 {
            return Err(Error::Config("linear mode uses the l2 norm".to_owned()));
        }
        Ok(())
    }
}

/// `dL_CF / d lambda_i = -eta * g_{t+1,i} * r_{t,i}`.
#[inline]
pub fn counterfactual_gradient(g_next: f64, r: f64, eta: f64) -> f64 {
    -eta * g_next * r
}

/// Soft-threshold `w` by `threshold`.
#[inline]
pub fn soft_threshold(w: f64, threshold: f64) -> f64 {
    if w > threshold {
        w - threshold
    } else if w < -threshold {
        w + threshold
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct TrainerState {
    pub net: Network,
    pub coeffs: RegCoefficients,
    /// `r_t` applied by the last weight step, awaiting its coefficient update.
    pub pending_r: Option<RegGradientSet>,
    pub step_index: u64,
}

impl TrainerState {
    pub fn new(net: Network, coeffs: RegCoefficients) -> Result<Self> {
        coeffs.check_congruent(&net)?;
        Ok(Self {
            net,
            coeffs,
            pending_r: None,
            step_index: 0,
        })
    }

    /// Weight step on `batch`; returns the batch loss before the step.
    pub fn weight_step(&mut self, batch: &Batch, config: &TrainConfig) -> Result<f64> {
        let (loss, grads) = self.net.backward(batch)?;
        self.weight_step_with(&grads, config)?;
        Ok(loss)
    }

    /// Weight step with a precomputed empirical gradient `g_t`.
    ///
    /// The stored `r` is the effective one, `(w - eta*g - w_next) / eta`, so
    /// `w_next = w - eta * (g + r)` holds for both update rules.
    pub fn weight_step_with(&mut self, grads: &GradientSet, config: &TrainConfig) -> Result<()> {
        if !(config.eta > 0.0) {
            return Err(Error::Config("eta must be positive".to_owned()));
        }
        if grads.weights.len() != self.net.layers().len() {
            return Err(Error::Dimension("gradient set does not match network".to_owned()));
        }
        let eta = config.eta;
        let norm = self.coeffs.norm;
        let proximal = config.weight_update == WeightUpdate::Proximal;
        if proximal && norm != Norm::L1 {
            return Err(Error::Config("the proximal update requires the l1 norm".to_owned()));
        }
        let step = self.step_index;
        let mut entries = Vec::with_capacity(grads.weights.len());
        for (k, layer) in self.net.layers_mut().iter_mut().enumerate() {
            let lam = &self.coeffs.lambdas[k];
            let g = &grads.weights[k];
            let mut r_eff = Matrix::zeros(lam.rows(), lam.cols());
            let ws = layer.weights.as_mut_slice();
            for (((w, &gi), &li), ri) in ws
                .iter_mut()
                .zip(g.as_slice())
                .zip(lam.as_slice())
                .zip(r_eff.as_mut_slice())
            {
                let scale = li.exp();
                if proximal {
                    let shifted = *w - eta * gi;
                    let next = soft_threshold(shifted, eta * scale);
                    *ri = (shifted - next) / eta;
                    *w = next;
                } else {
                    let r = scale * norm.derivative(*w);
                    *ri = r;
                    *w -= eta * (gi + r);
                }
            }
            for (b, &gb) in layer.bias.iter_mut().zip(&grads.biases[k]) {
                *b -= eta * gb;
            }
            if !layer.weights.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::NumericStep {
                    step,
                    detail: format!("non-finite parameter in layer {k} after weight update"),
                });
            }
            entries.push(r_eff);
        }
        self.pending_r = Some(RegGradientSet { entries });
        self.step_index += 1;
        Ok(())
    }

    /// Coefficient update from `g_{t+1}` (gradient on the next batch at the
    /// updated weights) and the pending `r_t`, followed by the projection.
    pub fn lambda_step(&mut self, g_next: &GradientSet, config: &TrainConfig) -> Result<()> {
        let pending = self.pending_r.take().ok_or_else(|| {
            Error::Sequencing("lambda_step called without a preceding weight step".to_owned())
        })?;
        if config.nu == 0.0 {
            // A zero rate leaves the already-projected coefficients fixed.
            return Ok(());
        }
        let factor = config.nu;
        for (k, lam) in self.coeffs.lambdas.iter_mut().enumerate() {
            let g = g_next.weights[k].as_slice();
            let r = pending.entries[k].as_slice();
            for ((l, &gi), &ri) in lam.as_mut_slice().iter_mut().zip(g).zip(r) {
                *l -= factor * counterfactual_gradient(gi, ri, config.eta);
            }
        }
        self.coeffs.project();
        if self.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericStep {
                step: self.step_index,
                detail: "non-finite regularization coefficient".to_owned(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    /// Fraction of weights with `|w| <= sparsity_epsilon`, per layer.
    pub zero_fraction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTrajectory {
    /// Flat row-major index into the first layer's weight matrix.
    pub edge_id: usize,
    /// `(w, lambda)` at the end of each epoch.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub epochs: Vec<EpochRecord>,
    pub trajectories: Vec<EdgeTrajectory>,
}

impl TrainRecord {
    pub fn to_csv(&self) -> String {
        let n_layers = self.epochs.first().map_or(0, |e| e.zero_fraction.len());
        let mut out = String::from("epoch,train_loss,val_loss");
        for k in 0..n_layers {
            let _ = write!(out, ",zero_fraction_layer_{k}");
        }
        out.push('\n');
        for e in &self.epochs {
            let val = e.val_loss.map(|v| v.to_string()).unwrap_or_default();
            let _ = write!(out, "{},{},{}", e.epoch, e.train_loss, val);
            for z in &e.zero_fraction {
                let _ = write!(out, ",{z}");
            }
            out.push('\n');
        }
        out
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("edge_id,epoch,w,lambda\n");
        for t in &self.trajectories {
            for (epoch, (w, l)) in t.points.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", t.edge_id, epoch, w, l);
            }
        }
        out
    }

    pub fn write_csvs(&self, record_path: &Path, trajectory_path: &Path) -> Result<()> {
        fs::write(record_path, self.to_csv()).map_err(|e| Error::io(record_path, e))?;
        fs::write(trajectory_path, self.trajectory_csv())
            .map_err(|e| Error::io(trajectory_path, e))
    }
}

fn zero_fractions(net: &Network, eps: f64) -> Vec<f64> {
    net.layers()
        .iter()
        .map(|l| {
            let w = l.weights.as_slice();
            w.iter().filter(|v| v.abs() <= eps).count() as f64 / w.len() as f64
        })
        .collect()
}

fn shuffled_batches(
    x: &Matrix,
    y: &[f64],
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Batch>> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.shuffle(rng);
    order
        .chunks(batch_size)
        .map(|idx| Batch::new(x.select_rows(idx), idx.iter().map(|&i| y[i]).collect()))
        .collect()
}

/// Trains a network on the training split of `dataset`.
///
/// Coefficients start at `theta` everywhere. The last batch of an epoch is
/// paired with the first batch of the next one; the final weight step of the
/// run has no coefficient update.
pub fn train(
    dataset: &Dataset,
    arch: &[LayerSpec],
    config: &TrainConfig,
) -> Result<(Network, RegCoefficients, TrainRecord)> {
    config.validate()?;
    let net = Network::init(arch, derive_seed(config.seed, 0))?;
    if net.input_width() != dataset.n_features() {
        return Err(Error::Config(format!(
            "architecture expects {} inputs, dataset has {} features",
            net.input_width(),
            dataset.n_features()
        )));
    }
    if config.mode == Mode::Linear
        && (arch.len() != 1 || arch[0].activation != Activation::Identity)
    {
        return Err(Error::Config(
            "linear mode needs a single identity layer".to_owned(),
        ));
    }
    let (x, y) = dataset.part(SplitTag::Train);
    if y.is_empty() {
        return Err(Error::Data("training split is empty".to_owned()));
    }
    let val = (dataset.count(SplitTag::Validation) > 0).then(|| dataset.part(SplitTag::Validation));

    let coeffs = RegCoefficients::uniform(&net, config.norm, config.theta);
    let mut state = TrainerState::new(net, coeffs)?;
    let mut record = TrainRecord::default();
    if config.epochs == 0 {
        return Ok((state.net, state.coeffs, record));
    }

    let n_first = state.net.layers()[0].weights.as_slice().len();
    let n_traj = config.trajectory_edges.min(n_first);
    record.trajectories = (0..n_traj)
        .map(|i| EdgeTrajectory {
            edge_id: i * n_first / n_traj,
            points: Vec::with_capacity(config.epochs),
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1));
    let learn_lambda = config.mode == Mode::Rln;
    let wrap = |epoch: usize, step: u64| {
        move |e: Error| Error::Training {
            epoch,
            step,
            source: Box::new(e),
        }
    };

    let mut batches = shuffled_batches(&x, &y, config.batch_size, &mut rng)?;
    let mut grads = state.net.backward(&batches[0]).map_err(wrap(0, 0))?.1;
    for epoch in 0..config.epochs {
        let mut upcoming: Option<Vec<Batch>> = None;
        for b in 0..batches.len() {
            let step = state.step_index;
            state.weight_step_with(&grads, config).map_err(wrap(epoch, step))?;
            let next = if b + 1 < batches.len() {
                Some(&batches[b + 1])
            } else if epoch + 1 < config.epochs {
                upcoming = Some(shuffled_batches(&x, &y, config.batch_size, &mut rng)?);
                upcoming.as_ref().map(|v| &v[0])
            } else {
                None
            };
            if let Some(next) = next {
                let (_, g_next) = state.net.backward(next).map_err(wrap(epoch, step))?;
                if learn_lambda {
                    state.lambda_step(&g_next, config).map_err(wrap(epoch, step))?;
                }
                grads = g_next;
            }
        }

        let train_loss = mse_loss(&state.net.forward(&x)?, &y)?;
        let val_loss = match &val {
            Some((vx, vy)) => Some(mse_loss(&state.net.forward(vx)?, vy)?),
            None => None,
        };
        record.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            zero_fraction: zero_fractions(&state.net, config.sparsity_epsilon),
        });
        let w0 = state.net.layers()[0].weights.as_slice();
        let l0 = state.coeffs.lambdas[0].as_slice();
        for t in &mut record.trajectories {
            t.points.push((w0[t.edge_id], l0[t.edge_id]));
        }
        if let Some(next) = upcoming {
            batches = next;
        }
    }
    Ok((state.net, state.coeffs, record))
}

/// Linear baseline: weights and intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn from_network(net: &Network) -> Result<Self> {
        if net.layers().len() != 1 || net.output_width() != 1 {
            return Err(Error::Config("not a single-output linear network".to_owned()));
        }
        let layer = &net.layers()[0];
        Ok(Self {
            weights: layer.weights.as_slice().to_vec(),
            intercept: layer.bias[0],
        })
    }

    pub fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        if inputs.cols() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "inputs have {} features, model expects {}",
                inputs.cols(),
                self.weights.len()
            )));
        }
        Ok((0..inputs.rows())
            .map(|r| crate::matrix::dot(inputs.row(r), &self.weights) + self.intercept)
            .collect())
    }
}

/// Ridge-penalized least squares fitted by the same SGD loop on a single
/// identity layer with a shared l2 coefficient `exp(theta)`.
pub fn train_linear(dataset: &Dataset, config: &TrainConfig) -> Result<(LinearModel, TrainRecord)> {
    let config = linear_config(config);
    let arch = [LayerSpec::new(dataset.n_features(), 1, Activation::Identity)];
    let (net, _, record) = train(dataset, &arch, &config)?;
    Ok((LinearModel::from_network(&net)?, record))
}

/// `config` adjusted to the linear baseline's fixed choices.
pub fn linear_config(config: &TrainConfig) -> TrainConfig {
    TrainConfig {
        mode: Mode::Linear,
        norm: Norm::L2,
        weight_update: WeightUpdate::Subgradient,
        nu: 0.0,
        ..config.clone()
    }
}
