//! Per-weight regularization coefficients stored in log space.
//!
//! Weight `i` is penalized by `exp(lambda_i) * ||w_i||` with `||w|| = |w|` (l1)
//! or `w^2` (l2). Biases carry no coefficient. After each coefficient update the
//! whole set is shifted so its mean equals `theta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    #[inline]
    pub fn value(&self, w: f64) -> f64 {
        match self {
            Norm::L1 => w.abs(),
            Norm::L2 => w * w,
        }
    }

    /// Derivative of the norm; the l1 subgradient at 0 is taken as 0.
    #[inline]
    pub fn derivative(&self, w: f64) -> f64 {
        match self {
            Norm::L1 => {
                if w > 0.0 {
                    1.0
                } else if w < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Norm::L2 => 2.0 * w,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(Error::Config(format!("unknown norm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegCoefficients {
    /// One matrix per layer, congruent with that layer's weights.
    pub lambdas: Vec<Matrix>,
    pub norm: Norm,
    pub theta: f64,
}

/// Gradient of the regularization term with respect to each weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RegGradientSet {
    pub entries: Vec<Matrix>,
}

impl RegCoefficients {
    /// Every coefficient set to `theta`.
    pub fn uniform(net: &Network, norm: Norm, theta: f64) -> Self {
        let lambdas = net
            .layers()
            .iter()
            .map(|l| {
                let mut m = Matrix::zeros(l.weights.rows(), l.weights.cols());
                m.as_mut_slice().fill(theta);
                m
            })
            .collect();
        Self {
            lambdas,
            norm,
            theta,
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.iter().map(|m| m.as_slice().len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.lambdas.iter().flat_map(|m| m.as_slice().iter())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.iter().copied()) / self.len() as f64
    }

    pub fn check_congruent(&self, net: &Network) -> Result<()> {
        if self.lambdas.len() != net.layers().len() {
            return Err(Error::Dimension(format!(
                "{} coefficient layers for a {}-layer network",
                self.lambdas.len(),
                net.layers().len()
            )));
        }
        for (k, (lam, layer)) in self.lambdas.iter().zip(net.layers()).enumerate() {
            if lam.rows() != layer.weights.rows() || lam.cols() != layer.weights.cols() {
                return Err(Error::Dimension(format!(
                    "layer {k}: coefficients {}x{} vs weights {}x{}",
                    lam.rows(),
                    lam.cols(),
                    layer.weights.rows(),
                    layer.weights.cols()
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        self.check_congruent(net)?;
        if !self.theta.is_finite() || self.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite regularization coefficient".to_owned()));
        }
        Ok(())
    }

    /// Shifts all coefficients by one shared constant so their mean is `theta`.
    ///
    /// The shift is accumulated from deviations about `theta`, so a set that
    /// already averages to `theta` exactly is left untouched.
    pub fn project(&mut self) {
        let theta = self.theta;
        let shift = -compensated_sum(self.iter().map(|v| v - theta)) / self.len() as f64;
        for m in &mut self.lambdas {
            for v in m.as_mut_slice() {
                *v += shift;
            }
        }
    }

    pub fn projected(mut self) -> Self {
        self.project();
        self
    }
}

/// `sum_i exp(lambda_i) * ||w_i||` over weights only.
pub fn reg_term(net: &Network, coeffs: &RegCoefficients) -> Result<f64> {
    coeffs.check_congruent(net)?;
    let mut total = 0.0;
    for (layer, lam) in net.layers().iter().zip(&coeffs.lambdas) {
        for (&w, &l) in layer.weights.as_slice().iter().zip(lam.as_slice()) {
            total += l.exp() * coeffs.norm.value(w);
        }
    }
    Ok(total)
}

/// `r_i = exp(lambda_i) * d||w_i||/dw_i`.
pub fn reg_gradient(net: &Network, coeffs: &RegCoefficients) -> Result<RegGradientSet> {
    coeffs.check_congruent(net)?;
    let entries = net
        .layers()
        .iter()
        .zip(&coeffs.lambdas)
        .map(|(layer, lam)| {
            let mut r = Matrix::zeros(lam.rows(), lam.cols());
            for ((ri, &w), &l) in r
                .as_mut_slice()
                .iter_mut()
                .zip(layer.weights.as_slice())
                .zip(lam.as_slice())
            {
                *ri = l.exp() * coeffs.norm.derivative(w);
            }
            r
        })
        .collect();
    Ok(RegGradientSet { entries })
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
