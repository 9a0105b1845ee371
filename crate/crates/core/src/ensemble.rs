//! Unweighted prediction averaging and the regression metrics used to score
//! single models and ensembles.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;
use crate::trainer::LinearModel;

/// Anything that maps a feature matrix to one prediction per row.
pub trait Predictor: Send + Sync {
    /// Expected feature width, or `None` for fixed prediction columns.
    fn input_width(&self) -> Option<usize>;
    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>>;
}

impl Predictor for Network {
    fn input_width(&self) -> Option<usize> {
        Some(Network::input_width(self))
    }

    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        self.forward(inputs)
    }
}

impl Predictor for LinearModel {
    fn input_width(&self) -> Option<usize> {
        Some(self.weights.len())
    }

    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        LinearModel::predict(self, inputs)
    }
}

/// Predictions produced elsewhere (e.g. a gradient-boosting model), one per
/// sample of a fixed evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalPredictions {
    pub values: Vec<f64>,
}

impl Predictor for ExternalPredictions {
    fn input_width(&self) -> Option<usize> {
        None
    }

    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        if inputs.rows() != self.values.len() {
            return Err(Error::Dimension(format!(
                "external column has {} rows, evaluation set has {}",
                self.values.len(),
                inputs.rows()
            )));
        }
        Ok(self.values.clone())
    }
}

/// Reads one numeric value per line; blank trailing lines are ignored.
pub fn load_external_predictions(path: &Path, m: usize) -> Result<ExternalPredictions> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Data(format!("line {}: non-numeric prediction '{l}'", i + 1)))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != m {
        return Err(Error::Data(format!(
            "{} predictions in {}, expected {m}",
            values.len(),
            path.display()
        )));
    }
    Ok(ExternalPredictions { values })
}

#[derive(Default)]
pub struct ModelSet {
    members: Vec<Box<dyn Predictor>>,
}

impl ModelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, member: impl Predictor + 'static) -> &mut Self {
        self.members.push(Box::new(member));
        self
    }

    pub fn push_boxed(&mut self, member: Box<dyn Predictor>) -> &mut Self {
        self.members.push(member);
        self
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Each member's predictions, in member order.
    pub fn member_predictions(&self, inputs: &Matrix) -> Result<Vec<Vec<f64>>> {
        if self.members.is_empty() {
            return Err(Error::Config("model set is empty".to_owned()));
        }
        for (i, m) in self.members.iter().enumerate() {
            if let Some(w) = m.input_width() {
                if w != inputs.cols() {
                    return Err(Error::Dimension(format!(
                        "member {i} expects {w} features, inputs have {}",
                        inputs.cols()
                    )));
                }
            }
        }
        self.members.iter().map(|m| m.predict(inputs)).collect()
    }
}

/// Per-sample mean, accumulated as offsets from the first member so that
/// agreeing members reproduce their shared value exactly.
fn column_mean(preds: &[Vec<f64>]) -> Vec<f64> {
    let k = preds.len() as f64;
    (0..preds[0].len())
        .map(|s| {
            let base = preds[0][s];
            base + preds.iter().map(|p| p[s] - base).sum::<f64>() / k
        })
        .collect()
}

/// Unweighted mean of member predictions.
pub fn ensemble_predict(ms: &ModelSet, inputs: &Matrix) -> Result<Vec<f64>> {
    Ok(column_mean(&ms.member_predictions(inputs)?))
}

/// Mean over samples of the population variance across members.
pub fn prediction_variance(ms: &ModelSet, inputs: &Matrix) -> Result<f64> {
    if ms.len() < 2 {
        return Err(Error::Config("prediction variance needs >= 2 members".to_owned()));
    }
    let preds = ms.member_predictions(inputs)?;
    Ok(variance_across(&preds))
}

pub(crate) fn variance_across(preds: &[Vec<f64>]) -> f64 {
    let k = preds.len() as f64;
    let m = preds[0].len();
    let mean = column_mean(preds);
    let total: f64 = (0..m)
        .map(|s| preds.iter().map(|p| (p[s] - mean[s]).powi(2)).sum::<f64>() / k)
        .sum();
    total / m as f64
}

/// `1 - SS_res / SS_tot`.
pub fn r2_score(pred: &[f64], targets: &[f64]) -> Result<f64> {
    if pred.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} predictions vs {} targets",
            pred.len(),
            targets.len()
        )));
    }
    if targets.len() < 2 {
        return Err(Error::Undefined("R^2 needs at least 2 samples".to_owned()));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Undefined("R^2 of constant targets".to_owned()));
    }
    let ss_res: f64 = pred.iter().zip(targets).map(|(p, y)| (y - p) * (y - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Indices of the `k` candidates with the highest validation R^2, best first.
/// Ties keep the earlier candidate.
pub fn select_top_k(validation_r2: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..validation_r2.len()).collect();
    idx.sort_by(|&a, &b| validation_r2[b].total_cmp(&validation_r2[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMetrics {
    pub name: String,
    pub r2: f64,
    /// Absent for single-member sets.
    pub variance: Option<f64>,
}

pub fn evaluate_ensemble(name: &str, ms: &ModelSet, inputs: &Matrix, targets: &[f64]) -> Result<EnsembleMetrics> {
    let preds = ms.member_predictions(inputs)?;
    let mean = column_mean(&preds);
    Ok(EnsembleMetrics {
        name: name.to_owned(),
        r2: r2_score(&mean, targets)?,
        variance: (preds.len() >= 2).then(|| variance_across(&preds)),
    })
}

pub fn metrics_csv(rows: &[EnsembleMetrics]) -> String {
    let mut out = String::from("ensemble_name,r2,variance\n");
    for r in rows {
        let var = r.variance.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", r.name, r.r2, var);
    }
    out
}
