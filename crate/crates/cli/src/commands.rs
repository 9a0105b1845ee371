//! Subcommand implementations. Each command computes all of its outputs in
//! memory and only then writes them, so a failing run leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use rln_core::analysis::{garson_importance, importance_entropy, sparsity_report};
use rln_core::data::{load_csv, split, standardize, synth_generate, Dataset, MissingPolicy, Scaler, SplitTag};
use rln_core::ensemble::{ensemble_predict, evaluate_ensemble, metrics_csv, r2_score, ExternalPredictions, ModelSet};
use rln_core::experiment::{grid_search as search, hidden_label, leaderboard_csv, run_benchmark};
use rln_core::matrix::Matrix;
use rln_core::model_io::ModelDocument;
use rln_core::network::{mlp_arch, mse_loss, Activation, Network};
use rln_core::trainer::{linear_config, train as fit, Mode};
use rln_core::{Error, Result};
use sha2::{Digest, Sha256};

use crate::config::{load_toml, to_toml, BenchmarkFile, RunConfig, TrainSection};
use crate::{AnalyzeArgs, BenchmarkArgs, DataTrainArgs, EvalArgs, GridSearchArgs, SynthArgs, TrainArgs};

fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

fn required_out(flag: &Option<PathBuf>, cfg: &Option<PathBuf>) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.clone())
        .ok_or_else(|| Error::Config("an output directory is required (--out or [output] dir)".to_owned()))
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut cfg: RunConfig = load_toml(args.config.as_deref())?;
    let out = required_out(&args.out, &cfg.output.dir)?;
    let s = &mut cfg.synth;
    s.n_samples = args.samples.unwrap_or(s.n_samples);
    s.n_features = args.features.unwrap_or(s.n_features);
    s.n_informative = args.informative.unwrap_or(s.n_informative);
    s.decay = args.decay.unwrap_or(s.decay);
    s.interaction_pairs = args.interactions.unwrap_or(s.interaction_pairs);
    s.noise_r2 = args.noise_r2.unwrap_or(s.noise_r2);
    s.seed = args.seed.unwrap_or(s.seed);
    let data = synth_generate(&cfg.synth)?;
    let meta = serde_json::to_string_pretty(&data.meta).map_err(|e| Error::Format(e.to_string()))?;
    write_outputs(&out, &[("data.csv", data.dataset.to_csv("y")), ("meta.json", meta + "\n")])?;
    println!(
        "wrote {} samples x {} features to {}",
        data.dataset.n_samples(),
        data.dataset.n_features(),
        out.display()
    );
    Ok(())
}

fn apply_common(cfg: &mut RunConfig, a: &DataTrainArgs) {
    if let Some(p) = &a.data {
        cfg.data.path = Some(p.clone());
    }
    if let Some(t) = &a.target {
        cfg.data.target = t.clone();
    }
    if let Some(s) = a.split {
        cfg.data.split = s;
    }
    if let Some(s) = a.split_seed {
        cfg.data.split_seed = s;
    }
    if let Some(o) = &a.out {
        cfg.output.dir = Some(o.clone());
    }
    if let Some(h) = &a.hidden {
        cfg.model.hidden = h.clone();
        cfg.grid.hidden = vec![h.clone()];
    }
    if let Some(act) = a.activation {
        cfg.model.activation = act;
    }
    let t = &mut cfg.train;
    t.mode = a.mode.or(t.mode);
    t.norm = a.norm.or(t.norm);
    t.weight_update = a.weight_update.or(t.weight_update);
    t.seed = a.seed.or(t.seed);
    if let Some(e) = a.epochs {
        t.epochs = Some(e);
        cfg.grid.epochs = vec![e];
    }
    if let Some(b) = a.batch_size {
        t.batch_size = Some(b);
        cfg.grid.batch_size = vec![b];
    }
}

/// Loads, splits and (optionally) standardizes the configured dataset.
fn prepare(cfg: &RunConfig) -> Result<(Dataset, Option<Scaler>)> {
    let path = cfg
        .data
        .path
        .as_ref()
        .ok_or_else(|| Error::Config("a data path is required (--data or [data] path)".to_owned()))?;
    let ds = load_csv(path, &cfg.data.target, cfg.data.missing)?;
    let ds = split(&ds, cfg.data.split, cfg.data.split_seed)?;
    if cfg.data.standardize {
        let (ds, scaler) = standardize(&ds)?;
        Ok((ds, Some(scaler)))
    } else {
        Ok((ds, None))
    }
}

fn part_r2(net: &Network, ds: &Dataset, tag: SplitTag) -> Result<Option<(f64, f64)>> {
    if ds.count(tag) < 2 {
        return Ok(None);
    }
    let (x, y) = ds.part(tag);
    let pred = net.forward(&x)?;
    Ok(Some((r2_score(&pred, &y)?, mse_loss(&pred, &y)?)))
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let mut cfg: RunConfig = load_toml(args.common.config.as_deref())?;
    apply_common(&mut cfg, &args.common);
    let t = &mut cfg.train;
    t.eta = args.eta.or(t.eta);
    t.nu = args.nu.or(t.nu);
    t.theta = args.theta.or(t.theta);
    t.sparsity_epsilon = args.sparsity_epsilon.or(t.sparsity_epsilon);
    let out = required_out(&None, &cfg.output.dir)?;
    let mut tc = cfg.train.resolve()?;
    if tc.mode == Mode::Linear {
        tc = linear_config(&tc);
        cfg.model.hidden.clear();
    }
    cfg.train = TrainSection::from_config(&tc);
    let (ds, scaler) = prepare(&cfg)?;
    let arch = mlp_arch(ds.n_features(), &cfg.model.hidden, cfg.model.activation);
    let (net, coeffs, record) = fit(&ds, &arch, &tc)?;
    let train_fit = part_r2(&net, &ds, SplitTag::Train)?;
    let val_fit = part_r2(&net, &ds, SplitTag::Validation)?;
    let mut metrics = String::from("split,r2,mse\n");
    for (name, fit) in [("train", train_fit), ("validation", val_fit)] {
        if let Some((r2, mse)) = fit {
            println!("{name} R^2 = {r2:.6}  MSE = {mse:.6}");
            metrics.push_str(&format!("{name},{r2},{mse}\n"));
        }
    }
    let doc = ModelDocument::new(net, Some(coeffs), tc, ds.feature_names.clone(), scaler)?;
    write_outputs(
        &out,
        &[
            ("model.json", doc.to_json()? + "\n"),
            ("train_record.csv", record.to_csv()),
            ("trajectories.csv", record.trajectory_csv()),
            ("metrics.csv", metrics),
            ("config.toml", to_toml(&cfg)?),
        ],
    )?;
    println!("model written to {}", out.join("model.json").display());
    Ok(())
}

/// Reorders CSV columns to the model's feature order and applies its scaler.
fn model_inputs(doc: &ModelDocument, ds: &Dataset) -> Result<Matrix> {
    let d = doc.network.input_width();
    let x = if doc.feature_names.is_empty() || doc.feature_names == ds.feature_names {
        if ds.n_features() != d {
            return Err(Error::Dimension(format!(
                "model expects {d} features, data has {}",
                ds.n_features()
            )));
        }
        ds.features.clone()
    } else {
        let mut cols = Vec::with_capacity(d);
        for name in &doc.feature_names {
            let j = ds
                .feature_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Dimension(format!("data has no feature column '{name}'")))?;
            cols.push(j);
        }
        let mut m = Matrix::zeros(ds.n_samples(), d);
        for i in 0..ds.n_samples() {
            for (k, &j) in cols.iter().enumerate() {
                m.set(i, k, ds.features.get(i, j));
            }
        }
        m
    };
    match &doc.scaler {
        Some(s) => s.transform(&x),
        None => Ok(x),
    }
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let docs: Vec<ModelDocument> = args.models.iter().map(|p| ModelDocument::load(p)).collect::<Result<_>>()?;
    let ds = load_csv(&args.data, &args.target, MissingPolicy::RejectRow)?;
    let mut set = ModelSet::new();
    for doc in &docs {
        let values = doc.network.forward(&model_inputs(doc, &ds)?)?;
        set.push(ExternalPredictions { values });
    }
    let name = if docs.len() == 1 { "model" } else { "ensemble" };
    let placeholder = Matrix::zeros(ds.n_samples(), 0);
    let metrics = evaluate_ensemble(name, &set, &placeholder, &ds.targets)?;
    let mean = ensemble_predict(&set, &placeholder)?;
    let mse = mse_loss(&mean, &ds.targets)?;
    println!("members = {}", docs.len());
    println!("R^2 = {:.6}", metrics.r2);
    println!("MSE = {mse:.6}");
    if let Some(v) = metrics.variance {
        println!("prediction variance = {v:.6}");
    }
    if let Some(out) = &args.out {
        let mut preds = String::from("sample,target,prediction\n");
        for (i, (y, p)) in ds.targets.iter().zip(&mean).enumerate() {
            preds.push_str(&format!("{i},{y},{p}\n"));
        }
        write_outputs(out, &[("metrics.csv", metrics_csv(&[metrics])), ("predictions.csv", preds)])?;
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let doc = ModelDocument::load(&args.model)?;
    let eps = args.epsilon.unwrap_or(doc.config.sparsity_epsilon);
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::Config("epsilon must be nonnegative".to_owned()));
    }
    let imp = garson_importance(&doc.network)?;
    let names = if doc.feature_names.is_empty() {
        (0..imp.len()).map(|j| format!("x{j}")).collect()
    } else {
        doc.feature_names.clone()
    };
    let entropy_line = if imp.is_all_zero() {
        "importance entropy: undefined (no nonzero input-output path)\n".to_owned()
    } else {
        format!("importance entropy: {:.6} bits\n", importance_entropy(&imp)?)
    };
    let report = sparsity_report(&doc.network, eps);
    let text = format!("{entropy_line}{}", report.summary());
    let mut ranked: Vec<(usize, f64)> = imp.values().iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    print!("{text}");
    println!("top features:");
    for (j, v) in ranked.iter().take(10) {
        println!("  {:<16} {v:.6}", names[*j]);
    }
    if let Some(out) = &args.out {
        write_outputs(out, &[("importance.csv", imp.to_csv(&names)?), ("sparsity.txt", text)])?;
    }
    Ok(())
}

pub fn grid_search(args: &GridSearchArgs) -> Result<()> {
    let mut cfg: RunConfig = load_toml(args.common.config.as_deref())?;
    apply_common(&mut cfg, &args.common);
    let out = required_out(&None, &cfg.output.dir)?;
    let base = cfg.train.resolve()?;
    let mode = base.mode;
    cfg.grid.validate()?;
    let (ds, _) = prepare(&cfg)?;
    let activation: Activation = cfg.model.activation;
    let result = search(&ds, &cfg.grid, mode, &base, activation)?;
    let best = &result.best;
    println!(
        "best of {} points: #{} hidden={} eta={} nu={} theta={} batch={} epochs={} val MSE={:.6}",
        result.leaderboard.len(),
        best.index,
        hidden_label(&best.hidden),
        best.config.eta,
        best.config.nu,
        best.config.theta,
        best.config.batch_size,
        best.config.epochs,
        result.leaderboard[best.index].val_mse
    );
    let mut best_cfg = cfg.clone();
    best_cfg.model.hidden = best.hidden.clone();
    best_cfg.train = TrainSection::from_config(&best.config);
    write_outputs(
        &out,
        &[
            ("leaderboard.csv", leaderboard_csv(&result.leaderboard)),
            ("best_config.toml", to_toml(&best_cfg)?),
            ("config.toml", to_toml(&cfg)?),
        ],
    )?;
    Ok(())
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    let mut file: BenchmarkFile = load_toml(args.config.as_deref())?;
    let b = &mut file.benchmark;
    b.n_seeds = args.seeds.unwrap_or(b.n_seeds);
    b.master_seed = args.master_seed.unwrap_or(b.master_seed);
    b.validate()?;
    let root = args
        .out
        .clone()
        .or_else(|| file.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let hash = Sha256::digest(to_toml(&file.benchmark)?.as_bytes());
    let dir = root.join(format!("benchmark-{}", &hex::encode(hash)[..16]));
    let result = run_benchmark(&file.benchmark)?;
    let summary = result.summary();
    write_outputs(
        &dir,
        &[
            ("config.toml", to_toml(&file)?),
            ("results.csv", result.rows_csv()),
            ("aggregates.csv", result.aggregates_csv()),
            ("leaderboards.csv", result.leaderboards_csv()),
            ("summary.txt", summary.clone()),
        ],
    )?;
    print!("{summary}");
    println!("results written to {}", dir.display());
    Ok(())
}
