//! Dense feedforward regression network with exact reverse-mode gradients.
//!
//! Layer `k` computes `a_k = act_k(a_{k-1} W_k^T + b_k)`, where `W_k` is stored
//! row-major as `(output_width x input_width)`. The last layer must use the
//! identity activation; [`Network::forward`] and [`Network::backward`] further
//! require a single output unit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{axpy, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Relu,
    LeakyRelu { slope: f64 },
    Identity,
}

impl Activation {
    pub fn validate(&self) -> Result<()> {
        if let Activation::LeakyRelu { slope } = *self {
            if !(slope > 0.0 && slope < 1.0) {
                return Err(Error::Config(format!(
                    "leaky_relu slope must lie in (0, 1), got {slope}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match *self {
            Activation::Relu => z.max(0.0),
            Activation::LeakyRelu { slope } => {
                if z > 0.0 {
                    z
                } else {
                    slope * z
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation. The relu kink takes 0.
    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu { slope } => {
                if z > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Activation::Relu => "relu".to_owned(),
            Activation::LeakyRelu { slope } => format!("leaky_relu({slope})"),
            Activation::Identity => "identity".to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_width: usize, output_width: usize, activation: Activation) -> Self {
        Self {
            input_width,
            output_width,
            activation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_width == 0 || self.output_width == 0 {
            return Err(Error::Config(format!(
                "layer widths must be >= 1, got {}->{}",
                self.input_width, self.output_width
            )));
        }
        self.activation.validate()
    }
}

/// Builds `input -> hidden... -> 1` with `hidden_activation` on every hidden
/// layer and an identity output.
pub fn mlp_arch(input: usize, hidden: &[usize], hidden_activation: Activation) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input;
    for &h in hidden {
        specs.push(LayerSpec::new(prev, h, hidden_activation));
        prev = h;
    }
    specs.push(LayerSpec::new(prev, 1, Activation::Identity));
    specs
}

/// Checks widths, activations and chain compatibility.
pub fn validate_arch(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Config("architecture has no layers".to_owned()));
    }
    for (k, spec) in specs.iter().enumerate() {
        spec.validate()?;
        if k > 0 && specs[k - 1].output_width != spec.input_width {
            return Err(Error::Config(format!(
                "layer {} outputs {} units but layer {k} expects {}",
                k - 1,
                specs[k - 1].output_width,
                spec.input_width
            )));
        }
    }
    let last = specs[specs.len() - 1];
    if last.activation != Activation::Identity {
        return Err(Error::Config(
            "final layer must use the identity activation".to_owned(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn spec(&self) -> LayerSpec {
        LayerSpec::new(self.weights.cols(), self.weights.rows(), self.activation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<Layer>,
}

/// Per-parameter gradients, shape-congruent with a [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientSet {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weights.rows(), l.weights.cols()))
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Matrix,
    pub targets: Vec<f64>,
}

impl Batch {
    pub fn new(inputs: Matrix, targets: Vec<f64>) -> Result<Self> {
        if inputs.rows() == 0 {
            return Err(Error::Dimension("batch must hold at least one sample".to_owned()));
        }
        if inputs.rows() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} input rows but {} targets",
                inputs.rows(),
                targets.len()
            )));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

impl Network {
    /// Random initialization: He-normal for rectifier layers, Glorot-normal
    /// for identity layers, zero biases.
    pub fn init(specs: &[LayerSpec], seed: u64) -> Result<Self> {
        validate_arch(specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs
            .iter()
            .map(|spec| {
                let fan_in = spec.input_width as f64;
                let fan_out = spec.output_width as f64;
                let std = match spec.activation {
                    Activation::Relu | Activation::LeakyRelu { .. } => (2.0 / fan_in).sqrt(),
                    Activation::Identity => (2.0 / (fan_in + fan_out)).sqrt(),
                };
                let dist = Normal::new(0.0, std).expect("std is positive and finite");
                let mut weights = Matrix::zeros(spec.output_width, spec.input_width);
                for w in weights.as_mut_slice() {
                    *w = dist.sample(&mut rng);
                }
                Layer {
                    weights,
                    bias: vec![0.0; spec.output_width],
                    activation: spec.activation,
                }
            })
            .collect();
        Ok(Self { layers })
    }

    /// Assembles a network from explicit layers, validating shapes and values.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let net = Self { layers };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        validate_arch(&self.specs())?;
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.bias.len() != layer.weights.rows() {
                return Err(Error::Dimension(format!(
                    "layer {k} has {} biases for {} units",
                    layer.bias.len(),
                    layer.weights.rows()
                )));
            }
            if !layer.weights.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::NumericLayer {
                    layer: k,
                    detail: "non-finite parameter".to_owned(),
                });
            }
        }
        Ok(())
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].weights.rows()
    }

    /// Number of regularized parameters (weights, not biases).
    pub fn n_weights(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len()).sum()
    }

    /// Multiplies every weight matrix of layer `k` by `c`.
    pub fn scale_layer(&mut self, k: usize, c: f64) {
        for w in self.layers[k].weights.as_mut_slice() {
            *w *= c;
        }
    }

    fn check_inputs(&self, inputs: &Matrix) -> Result<()> {
        if inputs.cols() != self.input_width() {
            return Err(Error::Dimension(format!(
                "inputs have {} features, network expects {}",
                inputs.cols(),
                self.input_width()
            )));
        }
        Ok(())
    }

    fn check_single_output(&self) -> Result<()> {
        if self.output_width() != 1 {
            return Err(Error::Dimension(format!(
                "regression requires one output unit, network has {}",
                self.output_width()
            )));
        }
        Ok(())
    }

    /// Output activations for every sample, `m x output_width`.
    pub fn forward_matrix(&self, inputs: &Matrix) -> Result<Matrix> {
        self.check_inputs(inputs)?;
        let mut a = inputs.clone();
        for layer in &self.layers {
            let mut z = a.affine_transposed(&layer.weights, &layer.bias);
            if layer.activation != Activation::Identity {
                for v in z.as_mut_slice() {
                    *v = layer.activation.apply(*v);
                }
            }
            a = z;
        }
        Ok(a)
    }

    pub fn forward(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        self.check_single_output()?;
        Ok(self.forward_matrix(inputs)?.into_vec())
    }

    /// Mean-squared-error loss on `batch` and its gradient with respect to
    /// every weight and bias.
    pub fn backward(&self, batch: &Batch) -> Result<(f64, GradientSet)> {
        self.check_single_output()?;
        self.check_inputs(&batch.inputs)?;
        let m = batch.len();
        let n_layers = self.layers.len();

        // pre[k] holds layer k's pre-activation, post[k] its input.
        let mut pre: Vec<Matrix> = Vec::with_capacity(n_layers);
        let mut post: Vec<Matrix> = Vec::with_capacity(n_layers + 1);
        post.push(batch.inputs.clone());
        for (k, layer) in self.layers.iter().enumerate() {
            let z = post[k].affine_transposed(&layer.weights, &layer.bias);
            if !z.is_finite() {
                return Err(Error::NumericLayer {
                    layer: k,
                    detail: "non-finite pre-activation".to_owned(),
                });
            }
            let mut a = z.clone();
            if layer.activation != Activation::Identity {
                for v in a.as_mut_slice() {
                    *v = layer.activation.apply(*v);
                }
            }
            pre.push(z);
            post.push(a);
        }

        let preds = post[n_layers].as_slice();
        let loss = mse_loss(preds, &batch.targets)?;
        let scale = 2.0 / m as f64;
        let mut delta = Matrix::from_vec(
            m,
            1,
            preds
                .iter()
                .zip(&batch.targets)
                .map(|(p, y)| scale * (p - y))
                .collect(),
        )?;

        let mut grads = GradientSet::zeros_like(self);
        for k in (0..n_layers).rev() {
            let layer = &self.layers[k];
            let input = &post[k];
            let gw = &mut grads.weights[k];
            let gb = &mut grads.biases[k];
            for s in 0..m {
                let d = delta.row(s);
                let x = input.row(s);
                for (o, &dv) in d.iter().enumerate() {
                    if dv != 0.0 {
                        axpy(dv, x, gw.row_mut(o));
                        gb[o] += dv;
                    }
                }
            }
            if !gw.is_finite() || gb.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericLayer {
                    layer: k,
                    detail: "non-finite gradient".to_owned(),
                });
            }
            if k > 0 {
                let prev_act = self.layers[k - 1].activation;
                let mut next = Matrix::zeros(m, layer.weights.cols());
                for s in 0..m {
                    let d = delta.row(s);
                    let out = next.row_mut(s);
                    for (o, &dv) in d.iter().enumerate() {
                        if dv != 0.0 {
                            axpy(dv, layer.weights.row(o), out);
                        }
                    }
                    for (v, &z) in out.iter_mut().zip(pre[k - 1].row(s)) {
                        *v *= prev_act.derivative(z);
                    }
                }
                delta = next;
            }
        }
        Ok((loss, grads))
    }
}

/// `(1/m) * sum (pred - target)^2`.
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} predictions vs {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Dimension("empty prediction vector".to_owned()));
    }
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    Ok(sse / predictions.len() as f64)
}
