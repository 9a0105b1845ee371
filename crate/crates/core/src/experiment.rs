//! Grid search on validation loss and the seeded benchmark protocol that
//! compares regularization-learning networks against uniform-coefficient
//! networks and linear models on synthetic data.
//!
//! Every grid point and seed is an independent job; results are collected in
//! a fixed order, so output does not depend on the degree of parallelism.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{garson_importance, importance_entropy, mean_pairwise_js, sparsity_report, ImportanceVector};
use crate::data::{split, standardize, synth_generate, Dataset, SplitTag, SynthConfig};
use crate::ensemble::r2_score;
use crate::error::{Error, Result};
use crate::network::{mlp_arch, mse_loss, Activation, LayerSpec, Network};
use crate::regularizer::Norm;
use crate::seed::derive_seed;
use crate::trainer::{linear_config, train, Mode, TrainConfig};

/// Candidate values per hyperparameter. The cross product is enumerated with
/// `hidden` outermost, then `batch_size`, `epochs`, `eta`, `nu`, `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    /// Hidden-layer widths; the input width comes from the data.
    pub hidden: Vec<Vec<usize>>,
    pub eta: Vec<f64>,
    pub nu: Vec<f64>,
    pub theta: Vec<f64>,
    pub batch_size: Vec<usize>,
    pub epochs: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            hidden: vec![vec![50, 10]],
            eta: vec![1e-3, 1e-2],
            nu: vec![1e3, 1e4, 1e5],
            theta: vec![-8.0, -6.0, -4.0],
            batch_size: vec![32],
            epochs: vec![100],
        }
    }
}

impl Grid {
    pub fn single(hidden: Vec<usize>, eta: f64, nu: f64, theta: f64, batch_size: usize, epochs: usize) -> Self {
        Self {
            hidden: vec![hidden],
            eta: vec![eta],
            nu: vec![nu],
            theta: vec![theta],
            batch_size: vec![batch_size],
            epochs: vec![epochs],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("hidden", self.hidden.len()),
            ("eta", self.eta.len()),
            ("nu", self.nu.len()),
            ("theta", self.theta.len()),
            ("batch_size", self.batch_size.len()),
            ("epochs", self.epochs.len()),
        ];
        for (name, len) in axes {
            if len == 0 {
                return Err(Error::Config(format!("grid axis '{name}' is empty")));
            }
        }
        if self.eta.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("grid eta values must be positive".to_owned()));
        }
        if self.nu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("grid nu values must be nonnegative".to_owned()));
        }
        if self.theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("grid theta values must be finite".to_owned()));
        }
        if self.batch_size.contains(&0) {
            return Err(Error::Config("grid batch sizes must be >= 1".to_owned()));
        }
        if self.hidden.iter().flatten().any(|&w| w == 0) {
            return Err(Error::Config("hidden widths must be >= 1".to_owned()));
        }
        Ok(())
    }

    /// Enumerates the grid for `mode`. Only `rln` searches over `nu`; the
    /// linear baseline ignores the hidden-layer axis.
    pub fn points(&self, mode: Mode, n_features: usize, base: &TrainConfig, activation: Activation) -> Result<Vec<GridPoint>> {
        self.validate()?;
        let nus: Vec<f64> = if mode == Mode::Rln { self.nu.clone() } else { vec![0.0] };
        let hiddens: Vec<Vec<usize>> = if mode == Mode::Linear { vec![Vec::new()] } else { self.hidden.clone() };
        let mut points = Vec::new();
        for hidden in &hiddens {
            for &batch_size in &self.batch_size {
                for &epochs in &self.epochs {
                    for &eta in &self.eta {
                        for &nu in &nus {
                            for &theta in &self.theta {
                                let mut config = TrainConfig {
                                    eta,
                                    nu,
                                    theta,
                                    batch_size,
                                    epochs,
                                    mode,
                                    ..base.clone()
                                };
                                if mode == Mode::Linear {
                                    config = linear_config(&config);
                                }
                                points.push(GridPoint {
                                    index: points.len(),
                                    hidden: hidden.clone(),
                                    arch: mlp_arch(n_features, hidden, activation),
                                    config,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub hidden: Vec<usize>,
    pub arch: Vec<LayerSpec>,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub index: usize,
    pub hidden: String,
    pub eta: f64,
    pub nu: f64,
    pub theta: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Validation MSE; infinite when training diverged.
    pub val_mse: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub best: GridPoint,
    pub leaderboard: Vec<LeaderboardRow>,
}

pub fn hidden_label(hidden: &[usize]) -> String {
    if hidden.is_empty() {
        "none".to_owned()
    } else {
        hidden.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
    }
}

pub fn leaderboard_csv(rows: &[LeaderboardRow]) -> String {
    let mut out = String::from("index,hidden,eta,nu,theta,batch_size,epochs,val_mse,diverged\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.index, r.hidden, r.eta, r.nu, r.theta, r.batch_size, r.epochs, r.val_mse, r.diverged
        );
    }
    out
}

/// Runs `f` on a pool with `jobs` threads (0 = rayon default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn validation_mse(ds: &Dataset, arch: &[LayerSpec], config: &TrainConfig) -> Result<Option<f64>> {
    match train(ds, arch, config) {
        Ok((net, _, _)) => {
            let (x, y) = ds.part(SplitTag::Validation);
            let mse = mse_loss(&net.forward(&x)?, &y)?;
            Ok(mse.is_finite().then_some(mse))
        }
        Err(e) if e.is_numeric() => Ok(None),
        Err(e) => Err(e),
    }
}

/// Trains every grid point on the training split with `base.seed` and keeps
/// the lowest validation MSE; ties go to the earliest point. Diverging points
/// score as infinite.
pub fn grid_search(
    ds: &Dataset,
    grid: &Grid,
    mode: Mode,
    base: &TrainConfig,
    activation: Activation,
) -> Result<GridSearchResult> {
    if ds.count(SplitTag::Validation) == 0 {
        return Err(Error::Data("grid search needs a nonempty validation split".to_owned()));
    }
    let points = grid.points(mode, ds.n_features(), base, activation)?;
    let scores: Vec<Option<f64>> = points
        .par_iter()
        .map(|p| validation_mse(ds, &p.arch, &p.config))
        .collect::<Result<_>>()?;
    let leaderboard: Vec<LeaderboardRow> = points
        .iter()
        .zip(&scores)
        .map(|(p, s)| LeaderboardRow {
            index: p.index,
            hidden: hidden_label(&p.hidden),
            eta: p.config.eta,
            nu: p.config.nu,
            theta: p.config.theta,
            batch_size: p.config.batch_size,
            epochs: p.config.epochs,
            val_mse: s.unwrap_or(f64::INFINITY),
            diverged: s.is_none(),
        })
        .collect();
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(v) = s {
            if best.is_none_or(|b| *v < scores[b].unwrap()) {
                best = Some(i);
            }
        }
    }
    let best = best.ok_or_else(|| Error::NumericStep {
        step: 0,
        detail: "every grid point diverged".to_owned(),
    })?;
    Ok(GridSearchResult {
        best: points[best].clone(),
        leaderboard,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkConfig {
    pub synth: SynthConfig,
    pub n_seeds: usize,
    pub master_seed: u64,
    /// Train / validation / test fractions.
    pub split: (f64, f64, f64),
    pub norm: Norm,
    pub activation: Activation,
    pub sparsity_epsilon: f64,
    /// Grid per model family; the key set selects which families run.
    pub grids: BTreeMap<Mode, Grid>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        let mut grids = BTreeMap::new();
        grids.insert(Mode::Rln, Grid::default());
        grids.insert(Mode::DnnUniform, Grid::default());
        Self {
            synth: SynthConfig::default(),
            n_seeds: 10,
            master_seed: 0,
            split: (0.6, 0.2, 0.2),
            norm: Norm::L1,
            activation: Activation::Relu,
            sparsity_epsilon: 0.0,
            grids,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be >= 1".to_owned()));
        }
        if self.grids.is_empty() {
            return Err(Error::Config("no model families selected".to_owned()));
        }
        self.activation.validate()?;
        for grid in self.grids.values() {
            grid.validate()?;
        }
        let s = [self.split.0, self.split.1, self.split.2];
        if s.iter().any(|v| *v <= 0.0) || (s.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(
                "benchmark split fractions must be positive and sum to 1".to_owned(),
            ));
        }
        Ok(())
    }

    fn base_config(&self, mode: Mode, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            sparsity_epsilon: self.sparsity_epsilon,
            trajectory_edges: 0,
            ..TrainConfig::new(mode, self.norm)
        }
    }

    /// Number of training runs per seed, final fits included.
    pub fn runs_per_seed(&self) -> usize {
        self.grids
            .iter()
            .map(|(mode, g)| {
                let nus = if *mode == Mode::Rln { g.nu.len() } else { 1 };
                let hidden = if *mode == Mode::Linear { 1 } else { g.hidden.len() };
                hidden * g.batch_size.len() * g.epochs.len() * g.eta.len() * nus * g.theta.len() + 1
            })
            .sum()
    }
}

/// Standardized, split synthetic dataset for benchmark seed `seed_index`.
pub fn benchmark_dataset(cfg: &BenchmarkConfig, seed_index: usize) -> Result<Dataset> {
    let seed = derive_seed(cfg.master_seed, seed_index as u64);
    let synth = SynthConfig {
        seed: derive_seed(seed, 0),
        ..cfg.synth.clone()
    };
    let raw = synth_generate(&synth)?.dataset;
    let parted = split(&raw, cfg.split, derive_seed(seed, 1))?;
    Ok(standardize(&parted)?.0)
}

/// Seed used to initialize and shuffle every model of benchmark seed `seed_index`.
pub fn benchmark_train_seed(cfg: &BenchmarkConfig, seed_index: usize) -> u64 {
    derive_seed(derive_seed(cfg.master_seed, seed_index as u64), 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub mode: Mode,
    pub seed_index: usize,
    pub test_r2: f64,
    pub first_layer_zero_fraction: f64,
    pub network_zero_fraction: f64,
    pub eliminated_feature_fraction: f64,
    /// Absent when the trained network has no nonzero input-to-output path.
    pub importance_entropy: Option<f64>,
    pub best_eta: f64,
    pub best_nu: f64,
    pub best_theta: f64,
    pub best_hidden: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TestR2,
    FirstLayerZeroFraction,
    NetworkZeroFraction,
    EliminatedFeatureFraction,
    ImportanceEntropy,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::TestR2,
        Metric::FirstLayerZeroFraction,
        Metric::NetworkZeroFraction,
        Metric::EliminatedFeatureFraction,
        Metric::ImportanceEntropy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::TestR2 => "test_r2",
            Metric::FirstLayerZeroFraction => "first_layer_zero_fraction",
            Metric::NetworkZeroFraction => "network_zero_fraction",
            Metric::EliminatedFeatureFraction => "eliminated_feature_fraction",
            Metric::ImportanceEntropy => "importance_entropy",
        }
    }
}

impl BenchmarkRow {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::TestR2 => Some(self.test_r2),
            Metric::FirstLayerZeroFraction => Some(self.first_layer_zero_fraction),
            Metric::NetworkZeroFraction => Some(self.network_zero_fraction),
            Metric::EliminatedFeatureFraction => Some(self.eliminated_feature_fraction),
            Metric::ImportanceEntropy => self.importance_entropy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mode: Mode,
    pub metric: Metric,
    /// Rows where the metric was defined.
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (0 for a single row).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub summaries: Vec<MetricSummary>,
    /// Seeds on which each mode had the highest test R^2 (ties to the earlier mode).
    pub r2_wins: BTreeMap<Mode, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLeaderboard {
    pub mode: Mode,
    pub seed_index: usize,
    pub rows: Vec<LeaderboardRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub rows: Vec<BenchmarkRow>,
    pub aggregates: Aggregates,
    /// Grid-search leaderboards per (family, seed); empty when not recorded.
    pub leaderboards: Vec<CellLeaderboard>,
}

pub fn compute_aggregates(rows: &[BenchmarkRow]) -> Aggregates {
    let mut modes: Vec<Mode> = rows.iter().map(|r| r.mode).collect();
    modes.sort();
    modes.dedup();
    let mut summaries = Vec::new();
    for &mode in &modes {
        for metric in Metric::ALL {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.mode == mode)
                .filter_map(|r| r.metric(metric))
                .collect();
            let n = vals.len();
            let mean = if n == 0 { f64::NAN } else { vals.iter().sum::<f64>() / n as f64 };
            let std = if n < 2 {
                0.0
            } else {
                (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            summaries.push(MetricSummary {
                mode,
                metric,
                n,
                mean,
                std,
            });
        }
    }
    let mut r2_wins: BTreeMap<Mode, usize> = modes.iter().map(|&m| (m, 0)).collect();
    let mut by_seed: BTreeMap<usize, Vec<&BenchmarkRow>> = BTreeMap::new();
    for r in rows {
        by_seed.entry(r.seed_index).or_default().push(r);
    }
    for group in by_seed.values() {
        let mut sorted = group.clone();
        sorted.sort_by_key(|r| r.mode);
        let mut winner = sorted[0];
        for r in &sorted[1..] {
            if r.test_r2 > winner.test_r2 {
                winner = r;
            }
        }
        *r2_wins.entry(winner.mode).or_default() += 1;
    }
    Aggregates { summaries, r2_wins }
}

impl BenchmarkResult {
    pub fn from_rows(mut rows: Vec<BenchmarkRow>) -> Self {
        rows.sort_by_key(|r| (r.seed_index, r.mode));
        let aggregates = compute_aggregates(&rows);
        Self {
            rows,
            aggregates,
            leaderboards: Vec::new(),
        }
    }

    pub fn leaderboards_csv(&self) -> String {
        let mut out = String::from("mode,seed_index,index,hidden,eta,nu,theta,batch_size,epochs,val_mse,diverged\n");
        for cell in &self.leaderboards {
            for r in &cell.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    cell.mode.as_str(),
                    cell.seed_index,
                    r.index,
                    r.hidden,
                    r.eta,
                    r.nu,
                    r.theta,
                    r.batch_size,
                    r.epochs,
                    r.val_mse,
                    r.diverged
                );
            }
        }
        out
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from(
            "mode,seed_index,test_r2,first_layer_zero_fraction,network_zero_fraction,\
             eliminated_feature_fraction,importance_entropy,best_hidden,best_eta,best_nu,best_theta\n",
        );
        for r in &self.rows {
            let ent = r.importance_entropy.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.mode.as_str(),
                r.seed_index,
                r.test_r2,
                r.first_layer_zero_fraction,
                r.network_zero_fraction,
                r.eliminated_feature_fraction,
                ent,
                r.best_hidden,
                r.best_eta,
                r.best_nu,
                r.best_theta
            );
        }
        out
    }

    pub fn aggregates_csv(&self) -> String {
        let mut out = String::from("mode,metric,n,mean,std\n");
        for s in &self.aggregates.summaries {
            let _ = writeln!(out, "{},{},{},{},{}", s.mode.as_str(), s.metric.as_str(), s.n, s.mean, s.std);
        }
        for (mode, wins) in &self.aggregates.r2_wins {
            let _ = writeln!(out, "{},test_r2_wins,{},{},", mode.as_str(), wins, wins);
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let n_seeds = self.rows.iter().map(|r| r.seed_index).max().map_or(0, |m| m + 1);
        let _ = writeln!(out, "benchmark over {n_seeds} seed(s)");
        for s in &self.aggregates.summaries {
            let _ = writeln!(
                out,
                "  {:<12} {:<28} mean {:>10.6}  std {:>9.6}  (n={})",
                s.mode.as_str(),
                s.metric.as_str(),
                s.mean,
                s.std,
                s.n
            );
        }
        for (mode, wins) in &self.aggregates.r2_wins {
            let _ = writeln!(out, "  {:<12} best test R^2 on {wins} seed(s)", mode.as_str());
        }
        out
    }
}

fn evaluate_final(net: &Network, ds: &Dataset, epsilon: f64) -> Result<(f64, f64, f64, f64, Option<f64>)> {
    let (x, y) = ds.part(SplitTag::Test);
    let r2 = r2_score(&net.forward(&x)?, &y)?;
    let sp = sparsity_report(net, epsilon);
    let imp = garson_importance(net)?;
    let entropy = if imp.is_all_zero() { None } else { Some(importance_entropy(&imp)?) };
    Ok((r2, sp.layer_zero_fraction[0], sp.network_zero_fraction, sp.eliminated_fraction, entropy))
}

/// Grid-searches one family on one seed, refits the winner on
/// train + validation, and scores it on the test split.
pub fn benchmark_cell(cfg: &BenchmarkConfig, mode: Mode, seed_index: usize, ds: &Dataset) -> Result<(BenchmarkRow, GridSearchResult)> {
    let grid = cfg
        .grids
        .get(&mode)
        .ok_or_else(|| Error::Config(format!("no grid for mode {}", mode.as_str())))?;
    let base = cfg.base_config(mode, benchmark_train_seed(cfg, seed_index));
    let gs = grid_search(ds, grid, mode, &base, cfg.activation)?;
    let merged = ds.merge_validation_into_train();
    let (net, _, _) = train(&merged, &gs.best.arch, &gs.best.config)?;
    let (test_r2, first, whole, elim, entropy) = evaluate_final(&net, &merged, cfg.sparsity_epsilon)?;
    Ok((
        BenchmarkRow {
            mode,
            seed_index,
            test_r2,
            first_layer_zero_fraction: first,
            network_zero_fraction: whole,
            eliminated_feature_fraction: elim,
            importance_entropy: entropy,
            best_eta: gs.best.config.eta,
            best_nu: gs.best.config.nu,
            best_theta: gs.best.config.theta,
            best_hidden: hidden_label(&gs.best.hidden),
        },
        gs,
    ))
}

/// Runs every (seed, family) cell. Deterministic for a fixed master seed.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkResult> {
    cfg.validate()?;
    let cells: Vec<(usize, Mode)> = (0..cfg.n_seeds)
        .flat_map(|s| cfg.grids.keys().map(move |&m| (s, m)))
        .collect();
    let datasets: Vec<Dataset> = (0..cfg.n_seeds)
        .into_par_iter()
        .map(|s| benchmark_dataset(cfg, s))
        .collect::<Result<_>>()?;
    let outcomes: Vec<(BenchmarkRow, GridSearchResult)> = cells
        .par_iter()
        .map(|&(s, mode)| benchmark_cell(cfg, mode, s, &datasets[s]))
        .collect::<Result<_>>()?;
    let mut leaderboards = Vec::with_capacity(outcomes.len());
    let mut rows = Vec::with_capacity(outcomes.len());
    for (row, gs) in outcomes {
        leaderboards.push(CellLeaderboard {
            mode: row.mode,
            seed_index: row.seed_index,
            rows: gs.leaderboard,
        });
        rows.push(row);
    }
    leaderboards.sort_by_key(|c| (c.seed_index, c.mode));
    Ok(BenchmarkResult {
        leaderboards,
        ..BenchmarkResult::from_rows(rows)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    /// Seeds where `mode_a` scored strictly higher than `mode_b`.
    pub wins: usize,
    /// Seeds where both values were defined.
    pub n: usize,
    /// Mean of `a - b` over compared seeds.
    pub mean_difference: f64,
}

/// Paired per-seed comparison of `metric` between two families.
pub fn trend_test(results: &BenchmarkResult, metric: Metric, mode_a: Mode, mode_b: Mode) -> Result<TrendResult> {
    let collect = |mode: Mode| -> BTreeMap<usize, Option<f64>> {
        results
            .rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| (r.seed_index, r.metric(metric)))
            .collect()
    };
    let a = collect(mode_a);
    let b = collect(mode_b);
    if a.is_empty() || b.is_empty() {
        return Err(Error::Config(format!(
            "trend test needs rows for both {} and {}",
            mode_a.as_str(),
            mode_b.as_str()
        )));
    }
    if !a.keys().eq(b.keys()) {
        return Err(Error::Config("trend test seeds are not matched".to_owned()));
    }
    let mut wins = 0;
    let mut n = 0;
    let mut total = 0.0;
    for (seed, va) in &a {
        if let (Some(x), Some(y)) = (va, b[seed]) {
            n += 1;
            total += x - y;
            if *x > y {
                wins += 1;
            }
        }
    }
    Ok(TrendResult {
        wins,
        n,
        mean_difference: if n == 0 { 0.0 } else { total / n as f64 },
    })
}

/// Trains `n` instantiations (different initialization/shuffle seeds) of one
/// configuration on the training split and returns their Garson importances
/// with the mean pairwise Jensen-Shannon divergence.
pub fn importance_consistency(
    ds: &Dataset,
    arch: &[LayerSpec],
    config: &TrainConfig,
    n: usize,
    seed: u64,
) -> Result<(Vec<ImportanceVector>, f64)> {
    let vectors: Vec<ImportanceVector> = (0..n)
        .into_par_iter()
        .map(|i| {
            let cfg = TrainConfig {
                seed: derive_seed(seed, i as u64),
                ..config.clone()
            };
            let (net, _, _) = train(ds, arch, &cfg)?;
            garson_importance(&net)
        })
        .collect::<Result<_>>()?;
    let js = mean_pairwise_js(&vectors)?;
    Ok((vectors, js))
}
