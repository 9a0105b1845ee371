//! Tabular datasets: CSV ingestion, splitting, standardization, univariate
//! screening, and a synthetic generator with geometrically decaying feature
//! importance.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    RejectRow,
    MeanImpute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
    pub split: Vec<SplitTag>,
}

impl Dataset {
    /// Builds a dataset with every sample tagged as training data.
    pub fn new(features: Matrix, targets: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        let m = targets.len();
        let ds = Self {
            features,
            targets,
            feature_names,
            split: vec![SplitTag::Train; m],
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.targets.len();
        if m == 0 {
            return Err(Error::Data("dataset has no samples".to_owned()));
        }
        if self.features.rows() != m || self.split.len() != m {
            return Err(Error::Data(format!(
                "{} feature rows, {} targets, {} split tags",
                self.features.rows(),
                m,
                self.split.len()
            )));
        }
        if self.feature_names.len() != self.features.cols() {
            return Err(Error::Data(format!(
                "{} feature names for {} columns",
                self.feature_names.len(),
                self.features.cols()
            )));
        }
        let mut seen = HashSet::new();
        for name in &self.feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate feature name '{name}'")));
            }
        }
        if !self.features.is_finite() || self.targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("dataset contains non-finite values".to_owned()));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn indices(&self, tag: SplitTag) -> Vec<usize> {
        self.split
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == tag)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, tag: SplitTag) -> usize {
        self.split.iter().filter(|&&t| t == tag).count()
    }

    /// Features and targets of one split, in original row order.
    pub fn part(&self, tag: SplitTag) -> (Matrix, Vec<f64>) {
        let idx = self.indices(tag);
        let x = self.features.select_rows(&idx);
        let y = idx.iter().map(|&i| self.targets[i]).collect();
        (x, y)
    }

    /// Relabels validation samples as training samples.
    pub fn merge_validation_into_train(&self) -> Dataset {
        let mut ds = self.clone();
        for t in &mut ds.split {
            if *t == SplitTag::Validation {
                *t = SplitTag::Train;
            }
        }
        ds
    }

    /// Writes `feature..., target_name` with full-precision values.
    pub fn write_csv(&self, path: &Path, target_name: &str) -> Result<()> {
        fs::write(path, self.to_csv(target_name)).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv(&self, target_name: &str) -> String {
        let mut out = String::new();
        out.push_str(&self.feature_names.join(","));
        out.push(',');
        out.push_str(target_name);
        out.push('\n');
        for r in 0..self.n_samples() {
            for v in self.features.row(r) {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{}\n", self.targets[r]));
        }
        out
    }
}

/// Reads a comma-separated file with a mandatory header row.
///
/// Empty cells are missing values; rows missing the target are always dropped.
pub fn load_csv(path: &Path, target_column: &str, policy: MissingPolicy) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Data(format!("{}: empty file", path.display())));
    }
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::Data(format!("target column '{target_column}' not found")))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, h)| h.to_owned())
        .collect();

    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut targets = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "row {} has {} cells, header has {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(feature_names.len());
        let mut target = None;
        for (i, cell) in record.iter().enumerate() {
            let value = if cell.is_empty() {
                None
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!("row {}: non-numeric cell '{cell}'", line + 2))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("row {}: non-finite cell '{cell}'", line + 2)));
                }
                Some(v)
            };
            if i == target_idx {
                target = value;
            } else {
                row.push(value);
            }
        }
        let Some(target) = target else { continue };
        if policy == MissingPolicy::RejectRow && row.iter().any(Option::is_none) {
            continue;
        }
        rows.push(row);
        targets.push(target);
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no usable rows", path.display())));
    }

    let d = feature_names.len();
    let mut means = vec![0.0; d];
    if policy == MissingPolicy::MeanImpute {
        for (j, mean) in means.iter_mut().enumerate() {
            let present: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            if present.is_empty() {
                return Err(Error::Data(format!(
                    "column '{}' has no values to impute from",
                    feature_names[j]
                )));
            }
            *mean = present.iter().sum::<f64>() / present.len() as f64;
        }
    }
    let data: Vec<f64> = rows
        .iter()
        .flat_map(|r| r.iter().enumerate().map(|(j, v)| v.unwrap_or(means[j])))
        .collect();
    let features = Matrix::from_vec(rows.len(), d, data)?;
    Dataset::new(features, targets, feature_names)
}

/// Per-feature affine map fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        let idx = ds.indices(SplitTag::Train);
        if idx.is_empty() {
            return Err(Error::Data("standardize needs a nonempty training split".to_owned()));
        }
        let n = idx.len() as f64;
        let d = ds.n_features();
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for j in 0..d {
            let mu = idx.iter().map(|&i| ds.features.get(i, j)).sum::<f64>() / n;
            let var = idx
                .iter()
                .map(|&i| {
                    let c = ds.features.get(i, j) - mu;
                    c * c
                })
                .sum::<f64>()
                / n;
            mean[j] = mu;
            // Constant columns keep a unit scale so they map to zero.
            std[j] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        }
        Ok(Self { mean, std })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "scaler fitted on {} features, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        Ok(out)
    }
}

/// Standardizes every sample with training-split statistics.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, Scaler)> {
    let scaler = Scaler::fit(ds)?;
    let mut out = ds.clone();
    out.features = scaler.transform(&ds.features)?;
    Ok((out, scaler))
}

/// Seeded random assignment of samples to train/validation/test.
///
/// Counts are `floor(M * f)` with the remainder handed to the largest
/// fractional parts, so each count is within one sample of `M * f`.
pub fn split(ds: &Dataset, fractions: (f64, f64, f64), seed: u64) -> Result<Dataset> {
    let f = [fractions.0, fractions.1, fractions.2];
    if f.iter().any(|v| !v.is_finite() || *v < 0.0) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must be nonnegative and sum to 1, got {fractions:?}"
        )));
    }
    let m = ds.n_samples();
    let exact: Vec<f64> = f.iter().map(|v| v * m as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|v| v.floor() as usize).collect();
    let mut rest = m - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        if f[k] > 0.0 {
            counts[k] += 1;
            rest -= 1;
        }
    }

    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = ds.clone();
    for (pos, &i) in perm.iter().enumerate() {
        out.split[i] = if pos < counts[0] {
            SplitTag::Train
        } else if pos < counts[0] + counts[1] {
            SplitTag::Validation
        } else {
            SplitTag::Test
        };
    }
    Ok(out)
}

/// Squared Pearson correlation of each feature with the target on the
/// training split. Constant features score 0.
pub fn feature_r2(ds: &Dataset) -> Result<Vec<f64>> {
    let (x, y) = ds.part(SplitTag::Train);
    if y.len() < 2 {
        return Err(Error::Data("feature_r2 needs at least 2 training samples".to_owned()));
    }
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    Ok((0..x.cols())
        .map(|j| {
            let col = x.column(j);
            let mx = col.iter().sum::<f64>() / n;
            let mut sxx = 0.0;
            let mut sxy = 0.0;
            for (a, b) in col.iter().zip(&y) {
                sxx += (a - mx) * (a - mx);
                sxy += (a - mx) * (b - my);
            }
            if sxx <= 0.0 || syy <= 0.0 {
                0.0
            } else {
                (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_informative: usize,
    /// Geometric importance decay; coefficient `j` is `decay^j`.
    pub decay: f64,
    pub interaction_pairs: usize,
    /// Fraction of target variance contributed by noise.
    pub noise_r2: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            n_features: 200,
            n_informative: 10,
            decay: 0.5,
            interaction_pairs: 0,
            noise_r2: 0.3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.n_features == 0 {
            return Err(Error::Config("n_samples and n_features must be >= 1".to_owned()));
        }
        if self.n_informative > self.n_features {
            return Err(Error::Config(format!(
                "n_informative ({}) exceeds n_features ({})",
                self.n_informative, self.n_features
            )));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::Config(format!("decay must lie in (0, 1], got {}", self.decay)));
        }
        if !(self.noise_r2 >= 0.0 && self.noise_r2 < 1.0) {
            return Err(Error::Config(format!(
                "noise_r2 must lie in [0, 1), got {}",
                self.noise_r2
            )));
        }
        if self.interaction_pairs > 0 && self.n_informative < 2 {
            return Err(Error::Config(
                "interaction pairs need at least 2 informative features".to_owned(),
            ));
        }
        let max_pairs = self.n_informative * self.n_informative.saturating_sub(1) / 2;
        if self.interaction_pairs > max_pairs {
            return Err(Error::Config(format!(
                "{} interaction pairs requested, only {max_pairs} distinct pairs exist",
                self.interaction_pairs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub a: usize,
    pub b: usize,
    pub gamma: f64,
}

/// Ground truth written next to a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthMeta {
    pub config: SynthConfig,
    /// Linear coefficients of the informative features, in column order.
    pub beta: Vec<f64>,
    pub interactions: Vec<Interaction>,
    pub noise_std: f64,
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub dataset: Dataset,
    pub meta: SynthMeta,
}

/// Interaction `k` pairs informative features at stride `1 + k / n`.
fn interaction_pair(k: usize, n: usize) -> (usize, usize) {
    let stride = 1 + k / n;
    let a = k % n;
    (a, (a + stride) % n)
}

/// Generates i.i.d. standard-normal features and a target built from the first
/// `n_informative` columns with coefficients `decay^j`, optional pairwise
/// products with coefficients `decay^k`, and Gaussian noise sized so that
/// noise carries `noise_r2` of the target variance.
pub fn synth_generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (m, d, k) = (cfg.n_samples, cfg.n_features, cfg.n_informative);
    let beta: Vec<f64> = (0..k).map(|j| cfg.decay.powi(j as i32)).collect();
    let interactions: Vec<Interaction> = (0..cfg.interaction_pairs)
        .map(|p| {
            let (a, b) = interaction_pair(p, k);
            Interaction {
                a,
                b,
                gamma: cfg.decay.powi(p as i32),
            }
        })
        .collect();
    let signal_var: f64 = beta.iter().map(|b| b * b).sum::<f64>()
        + interactions.iter().map(|g| g.gamma * g.gamma).sum::<f64>();
    let noise_std = if signal_var > 0.0 {
        (cfg.noise_r2 / (1.0 - cfg.noise_r2) * signal_var).sqrt()
    } else {
        1.0
    };

    let mut features = Matrix::zeros(m, d);
    for v in features.as_mut_slice() {
        *v = StandardNormal.sample(&mut rng);
    }
    let mut targets = Vec::with_capacity(m);
    for r in 0..m {
        let x = features.row(r);
        let mut y: f64 = beta.iter().zip(x).map(|(b, v)| b * v).sum();
        for g in &interactions {
            y += g.gamma * x[g.a] * x[g.b];
        }
        let eps: f64 = StandardNormal.sample(&mut rng);
        targets.push(y + noise_std * eps);
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Ok(SynthData {
        dataset: Dataset::new(features, targets, names)?,
        meta: SynthMeta {
            config: cfg.clone(),
            beta,
            interactions,
            noise_std,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn toy(rows: &[Vec<f64>], y: Vec<f64>) -> Dataset {
        let names = (0..rows[0].len()).map(|j| format!("f{j}")).collect();
        Dataset::new(Matrix::from_rows(rows).unwrap(), y, names).unwrap()
    }

    #[test]
    fn load_basic_file() {
        let f = write_tmp("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
        let ds = load_csv(f.path(), "y", MissingPolicy::RejectRow).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.feature_names, vec!["a", "b"]);
        assert_eq!(ds.targets, vec![3.0, 6.0, 9.0]);
        assert_eq!(ds.features.row(1), &[4.0, 5.0]);
    }

    #[test]
    fn reject_row_drops_incomplete_rows() {
        let f = write_tmp("a,b,y\n1,2,3\n4,,6\n7,8,9\n");
        let ds = load_csv(f.path(), "y", MissingPolicy::RejectRow).unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert_eq!(ds.targets, vec![3.0, 9.0]);
    }

    #[test]
    fn mean_impute_fills_column_mean() {
        let f = write_tmp("a,y\n1,0\n,0\n3,0\n");
        let ds = load_csv(f.path(), "y", MissingPolicy::MeanImpute).unwrap();
        assert_eq!(ds.features.column(0), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn load_errors() {
        let f = write_tmp("a,b\n1,2\n");
        assert!(matches!(load_csv(f.path(), "y", MissingPolicy::RejectRow), Err(Error::Data(_))));
        let f = write_tmp("a,y\nfoo,2\n");
        assert!(matches!(load_csv(f.path(), "y", MissingPolicy::RejectRow), Err(Error::Data(_))));
        let f = write_tmp("");
        assert!(load_csv(f.path(), "y", MissingPolicy::RejectRow).is_err());
        assert!(matches!(
            load_csv(Path::new("/definitely/not/here.csv"), "y", MissingPolicy::RejectRow),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn standardize_examples() {
        let ds = toy(&[vec![0.0, 5.0], vec![2.0, 5.0]], vec![0.0, 1.0]);
        let (out, scaler) = standardize(&ds).unwrap();
        assert_eq!(out.features.column(0), vec![-1.0, 1.0]);
        assert_eq!(out.features.column(1), vec![0.0, 0.0]);
        assert_eq!(scaler.std[1], 1.0);

        let scaler = Scaler {
            mean: vec![5.0],
            std: vec![2.0],
        };
        let t = scaler.transform(&Matrix::from_rows(&[vec![9.0]]).unwrap()).unwrap();
        assert_eq!(t.get(0, 0), 2.0);
    }

    #[test]
    fn standardize_uses_training_rows_only() {
        let mut ds = toy(&[vec![0.0], vec![2.0], vec![100.0]], vec![0.0, 0.0, 0.0]);
        ds.split[2] = SplitTag::Test;
        let (out, scaler) = standardize(&ds).unwrap();
        assert_eq!(scaler.mean, vec![1.0]);
        assert_eq!(out.features.get(2, 0), 99.0);
    }

    #[test]
    fn standardizing_twice_is_stable() {
        let data = synth_generate(&SynthConfig {
            n_samples: 300,
            n_features: 6,
            n_informative: 3,
            seed: 5,
            ..SynthConfig::default()
        })
        .unwrap();
        let mut ds = data.dataset;
        for v in ds.features.as_mut_slice() {
            *v = 3.0 * *v + 7.0;
        }
        let (once, _) = standardize(&ds).unwrap();
        let (twice, _) = standardize(&once).unwrap();
        for j in 0..twice.n_features() {
            let col = twice.features.column(j);
            let n = col.len() as f64;
            let mu = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n).sqrt();
            assert!(mu.abs() < 1e-10);
            assert!((sd - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn split_examples() {
        let ds = toy(&vec![vec![0.0]; 10], vec![0.0; 10]);
        let all = split(&ds, (1.0, 0.0, 0.0), 3).unwrap();
        assert_eq!(all.count(SplitTag::Train), 10);

        let s = split(&ds, (0.8, 0.1, 0.1), 3).unwrap();
        assert_eq!(
            (s.count(SplitTag::Train), s.count(SplitTag::Validation), s.count(SplitTag::Test)),
            (8, 1, 1)
        );
        assert_eq!(s.split, split(&ds, (0.8, 0.1, 0.1), 3).unwrap().split);
        assert!(split(&ds, (0.5, 0.4, 0.2), 3).is_err());
        assert!(split(&ds, (1.2, -0.2, 0.0), 3).is_err());
    }

    proptest! {
        #[test]
        fn split_counts_within_one(m in 1usize..200, a in 0.05f64..1.0, b in 0.0f64..1.0, seed in 0u64..50) {
            let total = a + b + 0.3;
            let f = (a / total, b / total, 1.0 - a / total - b / total);
            let ds = toy(&vec![vec![0.0]; m], vec![0.0; m]);
            let s = split(&ds, f, seed).unwrap();
            let counts = [s.count(SplitTag::Train), s.count(SplitTag::Validation), s.count(SplitTag::Test)];
            prop_assert_eq!(counts.iter().sum::<usize>(), m);
            for (c, fr) in counts.iter().zip([f.0, f.1, f.2]) {
                prop_assert!((*c as f64 - fr * m as f64).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn feature_r2_examples() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 1.0, (i * i) as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| -3.0 * i as f64).collect();
        let r2 = feature_r2(&toy(&rows, y)).unwrap();
        assert!((r2[0] - 1.0).abs() < 1e-12);
        assert_eq!(r2[1], 0.0);
        assert!(r2[2] > 0.8 && r2[2] < 1.0);
    }

    #[test]
    fn feature_r2_of_independent_noise_is_small() {
        let data = synth_generate(&SynthConfig {
            n_samples: 1000,
            n_features: 20,
            n_informative: 0,
            seed: 17,
            ..SynthConfig::default()
        })
        .unwrap();
        let r2 = feature_r2(&data.dataset).unwrap();
        assert!(r2.iter().all(|&v| v < 0.05), "{r2:?}");
        assert!(data.dataset.targets.iter().any(|&v| v != 0.0));
    }

    /// Solves the normal equations by Gaussian elimination with partial pivoting.
    fn least_squares(x: &Matrix, y: &[f64]) -> Vec<f64> {
        let d = x.cols();
        let mut a = vec![vec![0.0; d + 1]; d];
        for r in 0..x.rows() {
            let row = x.row(r);
            for i in 0..d {
                for j in 0..d {
                    a[i][j] += row[i] * row[j];
                }
                a[i][d] += row[i] * y[r];
            }
        }
        for c in 0..d {
            let p = (c..d).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            for r in 0..d {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=d {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        (0..d).map(|i| a[i][d] / a[i][i]).collect()
    }

    #[test]
    fn noiseless_linear_signal_is_recoverable() {
        let data = synth_generate(&SynthConfig {
            n_samples: 5000,
            n_features: 12,
            n_informative: 5,
            decay: 0.6,
            interaction_pairs: 0,
            noise_r2: 0.0,
            seed: 2,
        })
        .unwrap();
        let idx: Vec<usize> = (0..data.dataset.n_samples()).collect();
        let mut x = Matrix::zeros(idx.len(), 5);
        for r in 0..idx.len() {
            for j in 0..5 {
                x.set(r, j, data.dataset.features.get(r, j));
            }
        }
        let coef = least_squares(&x, &data.dataset.targets);
        for (c, b) in coef.iter().zip(&data.meta.beta) {
            assert!((c - b).abs() < 1e-2, "{coef:?} vs {:?}", data.meta.beta);
        }
    }

    #[test]
    fn flat_decay_gives_equal_univariate_r2() {
        let data = synth_generate(&SynthConfig {
            n_samples: 5000,
            n_features: 8,
            n_informative: 4,
            decay: 1.0,
            interaction_pairs: 0,
            noise_r2: 0.0,
            seed: 9,
        })
        .unwrap();
        let r2 = feature_r2(&data.dataset).unwrap();
        // Each of the 4 equal-weight features explains a quarter of the variance.
        for &v in &r2[..4] {
            assert!((v - 0.25).abs() < 0.02, "{r2:?}");
        }
    }

    #[test]
    fn decaying_importance_orders_univariate_r2() {
        let mut monotone = 0;
        for seed in 0..10 {
            let data = synth_generate(&SynthConfig {
                n_samples: 5000,
                n_features: 10,
                n_informative: 5,
                decay: 0.5,
                interaction_pairs: 0,
                noise_r2: 0.2,
                seed,
            })
            .unwrap();
            let r2 = feature_r2(&data.dataset).unwrap();
            if r2[..5].windows(2).all(|w| w[0] > w[1]) {
                monotone += 1;
            }
        }
        assert!(monotone >= 9, "monotone in {monotone}/10 seeds");
    }

    #[test]
    fn noise_fraction_matches_config() {
        let cfg = SynthConfig {
            n_samples: 20000,
            n_features: 6,
            n_informative: 4,
            decay: 0.7,
            interaction_pairs: 2,
            noise_r2: 0.4,
            seed: 1,
        };
        let data = synth_generate(&cfg).unwrap();
        let y = &data.dataset.targets;
        let n = y.len() as f64;
        let mu = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
        let frac = data.meta.noise_std.powi(2) / var;
        assert!((frac - 0.4).abs() < 0.03, "noise fraction {frac}");
        assert_eq!(data.meta.interactions.len(), 2);
        assert!(data.meta.interactions.iter().all(|g| g.a != g.b && g.a < 4 && g.b < 4));
    }

    #[test]
    fn synth_is_deterministic_and_validates() {
        let cfg = SynthConfig {
            n_samples: 50,
            n_features: 5,
            seed: 3,
            n_informative: 3,
            ..SynthConfig::default()
        };
        let a = synth_generate(&cfg).unwrap();
        let b = synth_generate(&cfg).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let bad = SynthConfig {
            n_informative: 9,
            ..cfg.clone()
        };
        assert!(synth_generate(&bad).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let data = synth_generate(&SynthConfig {
            n_samples: 40,
            n_features: 4,
            n_informative: 2,
            seed: 8,
            ..SynthConfig::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        data.dataset.write_csv(&p, "y").unwrap();
        let back = load_csv(&p, "y", MissingPolicy::RejectRow).unwrap();
        assert_eq!(back, data.dataset);
    }
}
