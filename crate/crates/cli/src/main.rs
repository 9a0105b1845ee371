//! `rln`: generate data, train, evaluate, analyze and benchmark
//! regularization-learning networks.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rln_core::network::Activation;
use rln_core::regularizer::Norm;
use rln_core::trainer::{Mode, WeightUpdate};
use rln_core::Error;

use crate::config::{parse_activation, parse_mode, parse_norm, parse_split, parse_weight_update};

#[derive(Parser, Debug)]
#[command(name = "rln", version, about = "Regularization learning networks for tabular regression")]
struct Cli {
    /// Worker threads for grid points and seeds (results do not depend on it).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic regression dataset (data.csv + meta.json).
    Synth(SynthArgs),
    /// Train one model (model.json, train_record.csv, trajectories.csv, config.toml).
    Train(TrainArgs),
    /// Score one model, or the mean prediction of several, on a CSV.
    Eval(EvalArgs),
    /// Garson importances, importance entropy and sparsity of a model.
    Analyze(AnalyzeArgs),
    /// Grid-search one model family on validation MSE.
    GridSearch(GridSearchArgs),
    /// Seeded comparison of model families on synthetic data.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (required here or as [output] dir in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub features: Option<usize>,
    #[arg(long)]
    pub informative: Option<usize>,
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub interactions: Option<usize>,
    #[arg(long)]
    pub noise_r2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Data and training flags shared by `train` and `grid-search`.
#[derive(Args, Debug)]
pub struct DataTrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    /// Train,validation,test fractions, e.g. 0.8,0.2,0.
    #[arg(long, value_parser = parse_split)]
    pub split: Option<(f64, f64, f64)>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long, value_parser = parse_norm)]
    pub norm: Option<Norm>,
    #[arg(long, value_parser = parse_weight_update)]
    pub weight_update: Option<WeightUpdate>,
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// relu, identity, leaky_relu or leaky_relu:<slope>.
    #[arg(long, value_parser = parse_activation)]
    pub activation: Option<Activation>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: DataTrainArgs,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Log-space regularization strength, usually negative (e.g. --theta -4).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub sparsity_epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GridSearchArgs {
    #[command(flatten)]
    pub common: DataTrainArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Model file; repeat to evaluate the ensemble mean.
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub target: String,
    /// Also write metrics.csv (and predictions.csv) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Zero threshold; defaults to the model's training setting.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Also write importance.csv and sparsity.txt here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parent directory; results go to <out>/benchmark-<config hash>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub master_seed: Option<u64>,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numeric() {
        return 4;
    }
    match e {
        Error::Config(_) | Error::Sequencing(_) => 2,
        Error::Training { source, .. } => exit_code(source),
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    let result = rln_core::experiment::with_jobs(jobs, move || match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::GridSearch(a) => commands::grid_search(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
    })
    .and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
