//! Sparsity and feature-importance analytics for trained networks.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;

/// Nonnegative per-input importances summing to one, or all zero when the
/// network has no path from any input to the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    values: Vec<f64>,
    all_zero: bool,
}

impl ImportanceVector {
    /// Normalizes nonnegative scores to sum to one.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Data("importance scores must be finite and >= 0".to_owned()));
        }
        let total: f64 = scores.iter().sum();
        if total == 0.0 {
            return Ok(Self {
                values: scores,
                all_zero: true,
            });
        }
        Ok(Self {
            values: scores.iter().map(|v| v / total).collect(),
            all_zero: false,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_all_zero(&self) -> bool {
        self.all_zero
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `feature_name,importance` rows.
    pub fn to_csv(&self, names: &[String]) -> Result<String> {
        if names.len() != self.values.len() {
            return Err(Error::Dimension(format!(
                "{} names for {} importances",
                names.len(),
                self.values.len()
            )));
        }
        let mut out = String::from("feature_name,importance\n");
        for (n, v) in names.iter().zip(&self.values) {
            let _ = writeln!(out, "{n},{v}");
        }
        Ok(out)
    }
}

/// Per-layer matrices of absolute weights with each receiving unit's row
/// divided by its total incoming absolute weight.
fn unit_normalized_layers(net: &Network) -> Vec<Vec<Vec<f64>>> {
    net.layers()
        .iter()
        .map(|layer| {
            let w = &layer.weights;
            (0..w.rows())
                .map(|o| {
                    let row = w.row(o);
                    let total: f64 = row.iter().map(|v| v.abs()).sum();
                    if total == 0.0 {
                        vec![0.0; row.len()]
                    } else {
                        row.iter().map(|v| v.abs() / total).collect()
                    }
                })
                .collect()
        })
        .collect()
}

/// Garson importance generalized to any depth: the per-unit normalized
/// absolute-weight matrices are chained from the output back to the inputs.
pub fn garson_importance(net: &Network) -> Result<ImportanceVector> {
    if net.output_width() != 1 {
        return Err(Error::Dimension(format!(
            "garson importance needs a single output, network has {}",
            net.output_width()
        )));
    }
    let layers = unit_normalized_layers(net);
    // Contribution of each unit of the current layer to the output.
    let mut share = vec![1.0];
    for a in layers.iter().rev() {
        let mut prev = vec![0.0; a[0].len()];
        for (o, row) in a.iter().enumerate() {
            if share[o] == 0.0 {
                continue;
            }
            for (p, v) in prev.iter_mut().zip(row) {
                *p += share[o] * v;
            }
        }
        share = prev;
    }
    ImportanceVector::from_scores(share)
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn importance_entropy(v: &ImportanceVector) -> Result<f64> {
    if v.is_all_zero() {
        return Err(Error::Undefined("entropy of an all-zero importance vector".to_owned()));
    }
    Ok(-v
        .values()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>())
}

fn kl_bits(p: &[f64], m: &[f64]) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(pi, mi)| pi * (pi / mi).log2())
        .sum()
}

/// Jensen-Shannon divergence in bits, bounded in `[0, 1]`.
pub fn js_divergence(p: &ImportanceVector, q: &ImportanceVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "importance vectors of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    if p.is_all_zero() || q.is_all_zero() {
        return Err(Error::Undefined("divergence of an all-zero importance vector".to_owned()));
    }
    let m: Vec<f64> = p.values().iter().zip(q.values()).map(|(a, b)| 0.5 * (a + b)).collect();
    let js = 0.5 * kl_bits(p.values(), &m) + 0.5 * kl_bits(q.values(), &m);
    Ok(js.clamp(0.0, 1.0))
}

/// Mean JSD over all unordered pairs.
pub fn mean_pairwise_js(vectors: &[ImportanceVector]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::Undefined("pairwise divergence needs >= 2 vectors".to_owned()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            total += js_divergence(&vectors[i], &vectors[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub epsilon: f64,
    pub layer_zero_fraction: Vec<f64>,
    pub network_zero_fraction: f64,
    /// Inputs whose first-layer outgoing weights are all zero.
    pub eliminated_features: usize,
    pub eliminated_fraction: f64,
}

impl SparsityReport {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "epsilon: {}", self.epsilon);
        for (k, z) in self.layer_zero_fraction.iter().enumerate() {
            let _ = writeln!(out, "layer {k} zero fraction: {z:.6}");
        }
        let _ = writeln!(out, "network zero fraction: {:.6}", self.network_zero_fraction);
        let _ = writeln!(
            out,
            "eliminated features: {} ({:.6})",
            self.eliminated_features, self.eliminated_fraction
        );
        out
    }
}

/// A weight counts as zero iff `|w| <= epsilon`.
pub fn sparsity_report(net: &Network, epsilon: f64) -> SparsityReport {
    let is_zero = |w: &f64| w.abs() <= epsilon;
    let mut zeros = 0usize;
    let mut total = 0usize;
    let layer_zero_fraction = net
        .layers()
        .iter()
        .map(|l| {
            let w = l.weights.as_slice();
            let z = w.iter().filter(|v| is_zero(v)).count();
            zeros += z;
            total += w.len();
            z as f64 / w.len() as f64
        })
        .collect();
    let first = &net.layers()[0].weights;
    let eliminated_features = (0..first.cols())
        .filter(|&j| (0..first.rows()).all(|o| is_zero(&first.get(o, j))))
        .count();
    SparsityReport {
        epsilon,
        layer_zero_fraction,
        network_zero_fraction: zeros as f64 / total as f64,
        eliminated_features,
        eliminated_fraction: eliminated_features as f64 / first.cols() as f64,
    }
}
