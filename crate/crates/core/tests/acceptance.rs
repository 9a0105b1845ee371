//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p rln-core --test acceptance -- 1 4 10`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rln_core::analysis::{garson_importance, mean_pairwise_js};
use rln_core::ensemble::{ensemble_predict, ModelSet};
use rln_core::experiment::{
    benchmark_dataset, benchmark_train_seed, importance_consistency, run_benchmark, trend_test, with_jobs,
    BenchmarkConfig, BenchmarkResult, Grid, Metric,
};
use rln_core::matrix::Matrix;
use rln_core::network::{mlp_arch, mse_loss, Activation, Batch, Network};
use rln_core::regularizer::{Norm, RegCoefficients, RegGradientSet};
use rln_core::trainer::{counterfactual_gradient, soft_threshold, train, Mode, TrainConfig, WeightUpdate};
use rln_core::data::SynthConfig;
use rln_core::network::GradientSet;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| scale * normal(rng)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

fn random_batch(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Batch {
    let x = random_matrix(rng, m, d, 1.0);
    let y = (0..m).map(|_| normal(rng)).collect();
    Batch::new(x, y).unwrap()
}

/// Random network with nonzero biases (initialization leaves them at zero).
fn random_net(rng: &mut ChaCha8Rng, specs: &[rln_core::network::LayerSpec]) -> Network {
    let mut net = Network::init(specs, rng.random()).unwrap();
    for layer in net.layers_mut() {
        for b in &mut layer.bias {
            *b = 0.3 * normal(rng);
        }
    }
    net
}

/// Loss on `next` after one subgradient weight step on `cur` with coefficients `coeffs`.
fn counterfactual_loss(net: &Network, coeffs: &RegCoefficients, cur: &Batch, next: &Batch, eta: f64) -> f64 {
    let cfg = TrainConfig {
        eta,
        nu: 0.0,
        weight_update: WeightUpdate::Subgradient,
        ..TrainConfig::new(Mode::Rln, coeffs.norm)
    };
    let mut state = rln_core::trainer::TrainerState::new(net.clone(), coeffs.clone()).unwrap();
    state.weight_step(cur, &cfg).unwrap();
    mse_loss(&state.net.forward(&next.inputs).unwrap(), &next.targets).unwrap()
}

/// Criterion 1: finite differences of the counterfactual loss in each lambda.
fn theorem_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let specs = mlp_arch(2, &[4], Activation::Relu);
    let eta = 0.05;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for norm in [Norm::L2, Norm::L1] {
        for _ in 0..20 {
            let net = random_net(&mut rng, &specs);
            let mut coeffs = RegCoefficients::uniform(&net, norm, -1.0);
            for lam in &mut coeffs.lambdas {
                for v in lam.as_mut_slice() {
                    *v = rng.random_range(-2.0..0.0);
                }
            }
            let cur = random_batch(&mut rng, 8, 2);
            let next = random_batch(&mut rng, 8, 2);
            let cfg = TrainConfig {
                eta,
                weight_update: WeightUpdate::Subgradient,
                ..TrainConfig::new(Mode::Rln, norm)
            };
            let mut state = rln_core::trainer::TrainerState::new(net.clone(), coeffs.clone()).unwrap();
            state.weight_step(&cur, &cfg).unwrap();
            let r = state.pending_r.clone().unwrap();
            let (_, g_next) = state.net.backward(&next).unwrap();
            for k in 0..net.layers().len() {
                let w = net.layers()[k].weights.as_slice();
                for i in 0..w.len() {
                    if norm == Norm::L1 && w[i].abs() <= 1e-3 {
                        continue;
                    }
                    // Independent r: exp(lambda) times the norm derivative.
                    let lam = coeffs.lambdas[k].as_slice()[i];
                    let r_oracle = match norm {
                        Norm::L1 => lam.exp() * w[i].signum(),
                        Norm::L2 => lam.exp() * 2.0 * w[i],
                    };
                    let r_i = r.entries[k].as_slice()[i];
                    if (r_i - r_oracle).abs() > 1e-15 * r_oracle.abs().max(1.0) {
                        return outcome(false, format!("stored r {r_i} differs from exp(lambda)*|w|' {r_oracle}"));
                    }
                    let mut plus = coeffs.clone();
                    plus.lambdas[k].as_mut_slice()[i] += h;
                    let mut minus = coeffs.clone();
                    minus.lambdas[k].as_mut_slice()[i] -= h;
                    let fd = (counterfactual_loss(&net, &plus, &cur, &next, eta)
                        - counterfactual_loss(&net, &minus, &cur, &next, eta))
                        / (2.0 * h);
                    let an = counterfactual_gradient(g_next.weights[k].as_slice()[i], r_i, eta);
                    // Floor at the oracle's roundoff (loss ~1, eps / h ~ 1e-11).
                    let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-8);
                    worst = worst.max(rel);
                    checked += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-4 && secs(t) < 10.0,
        format!("max rel err {worst:.2e} over {checked} coefficients, 40 nets (limit 1e-4), {:.2}s (limit 10s)", secs(t)),
    )
}

/// Reference forward pass, independent of the library's kernels.
fn oracle_loss(net: &Network, batch: &Batch) -> f64 {
    let mut total = 0.0;
    for i in 0..batch.inputs.rows() {
        let mut a: Vec<f64> = batch.inputs.row(i).to_vec();
        for layer in net.layers() {
            let w = &layer.weights;
            a = (0..w.rows())
                .map(|o| {
                    let z: f64 = layer.bias[o] + (0..w.cols()).map(|j| w.get(o, j) * a[j]).sum::<f64>();
                    layer.activation.apply(z)
                })
                .collect();
        }
        let e = a[0] - batch.targets[i];
        total += e * e;
    }
    total / batch.inputs.rows() as f64
}

fn min_abs_preactivation(net: &Network, batch: &Batch) -> f64 {
    let mut smallest = f64::INFINITY;
    for i in 0..batch.inputs.rows() {
        let mut a: Vec<f64> = batch.inputs.row(i).to_vec();
        let last = net.layers().len() - 1;
        for (k, layer) in net.layers().iter().enumerate() {
            let w = &layer.weights;
            let z: Vec<f64> = (0..w.rows())
                .map(|o| layer.bias[o] + (0..w.cols()).map(|j| w.get(o, j) * a[j]).sum::<f64>())
                .collect();
            if k < last {
                smallest = z.iter().fold(smallest, |m, v| m.min(v.abs()));
            }
            a = z.iter().map(|&v| layer.activation.apply(v)).collect();
        }
    }
    smallest
}

/// Criterion 2: backprop against central differences of an independent forward pass.
fn backprop_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let archs = [
        mlp_arch(3, &[5], Activation::Relu),
        mlp_arch(4, &[6, 3], Activation::LeakyRelu { slope: 0.1 }),
        mlp_arch(2, &[4, 4], Activation::Relu),
        mlp_arch(5, &[3], Activation::Identity),
    ];
    // Away from kinks the loss is quadratic in any single parameter, so the
    // central difference has no truncation error; only rounding (~eps*L/h)
    // remains, and it has to sit well below the tolerance.
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut nets = 0;
    let mut draws = 0;
    while nets < 10 {
        draws += 1;
        let net = random_net(&mut rng, &archs[draws % archs.len()]);
        let batch = random_batch(&mut rng, 6, net.input_width());
        // A perturbation of h cannot move a pre-activation by more than ~h*|x|.
        if min_abs_preactivation(&net, &batch) < 1e-3 {
            continue;
        }
        nets += 1;
        let (_, grads) = net.backward(&batch).unwrap();
        let mut check = |an: f64, f: &dyn Fn(f64) -> Network| {
            let fd = (oracle_loss(&f(h), &batch) - oracle_loss(&f(-h), &batch)) / (2.0 * h);
            let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
        };
        for k in 0..net.layers().len() {
            for i in 0..net.layers()[k].weights.as_slice().len() {
                check(grads.weights[k].as_slice()[i], &|d| {
                    let mut n = net.clone();
                    n.layers_mut()[k].weights.as_mut_slice()[i] += d;
                    n
                });
            }
            for o in 0..net.layers()[k].bias.len() {
                check(grads.biases[k][o], &|d| {
                    let mut n = net.clone();
                    n.layers_mut()[k].bias[o] += d;
                    n
                });
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-6 && secs(t) < 10.0,
        format!("max rel err {worst:.2e} over 10 nets (limit 1e-6), {:.2}s (limit 10s)", secs(t)),
    )
}

/// Criterion 3: mean and pairwise differences across 1000 coefficient updates.
fn projection_invariant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let net = Network::init(&mlp_arch(7, &[6, 4], Activation::Relu), 3).unwrap();
    let theta = -6.6;
    let mut state = rln_core::trainer::TrainerState::new(net.clone(), RegCoefficients::uniform(&net, Norm::L1, theta)).unwrap();
    let cfg = TrainConfig {
        eta: 0.05,
        nu: 50.0,
        theta,
        ..TrainConfig::new(Mode::Rln, Norm::L1)
    };
    let mut worst_mean: f64 = 0.0;
    let mut worst_diff: f64 = 0.0;
    for _ in 0..1000 {
        let shapes: Vec<(usize, usize)> = net.layers().iter().map(|l| (l.weights.rows(), l.weights.cols())).collect();
        let g = GradientSet {
            weights: shapes.iter().map(|&(r, c)| random_matrix(&mut rng, r, c, 0.5)).collect(),
            biases: shapes.iter().map(|&(r, _)| vec![0.0; r]).collect(),
        };
        let r = RegGradientSet {
            entries: shapes.iter().map(|&(r, c)| random_matrix(&mut rng, r, c, 0.05)).collect(),
        };
        // Pre-projection values, computed independently.
        let raw: Vec<f64> = state
            .coeffs
            .lambdas
            .iter()
            .zip(&g.weights)
            .zip(&r.entries)
            .flat_map(|((l, gk), rk)| {
                l.as_slice()
                    .iter()
                    .zip(gk.as_slice())
                    .zip(rk.as_slice())
                    .map(|((&l, &gi), &ri)| l + cfg.nu * cfg.eta * gi * ri)
                    .collect::<Vec<_>>()
            })
            .collect();
        state.pending_r = Some(r);
        state.lambda_step(&g, &cfg).unwrap();
        let after: Vec<f64> = state.coeffs.iter().copied().collect();
        let mean = after.iter().sum::<f64>() / after.len() as f64;
        worst_mean = worst_mean.max((mean - theta).abs());
        for i in 1..after.len() {
            let d = ((after[i] - after[0]) - (raw[i] - raw[0])).abs();
            worst_diff = worst_diff.max(d);
        }
    }
    outcome(
        worst_mean < 1e-10 && worst_diff < 1e-12,
        format!("max |mean - theta| {worst_mean:.2e} (limit 1e-10), max pairwise drift {worst_diff:.2e} (limit 1e-12)"),
    )
}

/// Criterion 4: soft thresholding against a brute-force grid argmin.
fn proximal_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let w_prime: f64 = rng.random_range(-1.0..1.0);
        let eta: f64 = 10f64.powf(rng.random_range(-3.0..0.0));
        let lambda: f64 = rng.random_range(-6.0..1.0);
        let scale = lambda.exp();
        let objective = |w: f64| (w - w_prime).powi(2) / (2.0 * eta) + scale * w.abs();
        let k_max = (2.0 * w_prime.abs() / step).ceil() as i64;
        let mut best = (0.0, objective(0.0));
        for k in -k_max..=k_max {
            let w = k as f64 * step;
            let v = objective(w);
            if v < best.1 {
                best = (w, v);
            }
        }
        let prox = soft_threshold(w_prime, eta * scale);
        worst = worst.max((prox - best.0).abs());
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-4 && secs(t) < 5.0,
        format!("max |prox - argmin| {worst:.2e} over 1000 triples (limit 1e-4), {:.2}s (limit 5s)", secs(t)),
    )
}

fn net_bits(net: &Network) -> Vec<u64> {
    net.layers()
        .iter()
        .flat_map(|l| l.weights.as_slice().iter().chain(&l.bias).map(|v| v.to_bits()).collect::<Vec<_>>())
        .collect()
}

/// Criterion 5: rln with nu = 0 reproduces dnn_uniform bit for bit.
fn degenerate_equivalence() -> Outcome {
    let data = rln_core::data::synth_generate(&SynthConfig {
        n_samples: 300,
        n_features: 12,
        n_informative: 4,
        decay: 0.6,
        interaction_pairs: 2,
        noise_r2: 0.2,
        seed: 5,
    })
    .unwrap();
    let ds = rln_core::data::split(&data.dataset, (0.7, 0.3, 0.0), 1).unwrap();
    let arch = mlp_arch(12, &[8, 4], Activation::Relu);
    let mut identical = true;
    for norm in [Norm::L1, Norm::L2] {
        let base = TrainConfig {
            epochs: 10,
            batch_size: 16,
            theta: -4.0,
            seed: 17,
            ..TrainConfig::new(Mode::DnnUniform, norm)
        };
        let rln = TrainConfig {
            mode: Mode::Rln,
            nu: 0.0,
            ..base.clone()
        };
        let (a, ca, ra) = train(&ds, &arch, &base).unwrap();
        let (b, cb, rb) = train(&ds, &arch, &rln).unwrap();
        identical &= net_bits(&a) == net_bits(&b) && ca == cb && ra == rb;
    }
    outcome(identical, "10-epoch runs, l1 (proximal) and l2, weights/biases/lambdas/records compared bitwise".to_owned())
}

/// Criterion 8: the averaged prediction never has larger MSE than the mean member.
fn jensen_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    let mut worst_gap = f64::NEG_INFINITY;
    for set in 0..100 {
        let d = 1 + set % 6;
        let k = 2 + set % 5;
        let m = 5 + set % 20;
        let x = random_matrix(&mut rng, m, d, 1.0);
        let y: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
        let mut ms = ModelSet::new();
        for _ in 0..k {
            let hidden = 1 + rng.random_range(0..6);
            ms.push(random_net(&mut rng, &mlp_arch(d, &[hidden], Activation::Relu)));
        }
        let preds = ms.member_predictions(&x).unwrap();
        let mean_member = preds.iter().map(|p| mse_loss(p, &y).unwrap()).sum::<f64>() / k as f64;
        let avg = mse_loss(&ensemble_predict(&ms, &x).unwrap(), &y).unwrap();
        worst_gap = worst_gap.max(avg - mean_member);
    }
    outcome(
        worst_gap <= 1e-12,
        format!("max (ensemble MSE - mean member MSE) {worst_gap:.2e} over 100 sets (limit 1e-12)"),
    )
}

/// Criterion 10: Garson chaining against explicit path enumeration.
fn garson_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let net = random_net(&mut rng, &mlp_arch(3, &[5], Activation::Relu));
        let w1 = &net.layers()[0].weights;
        let w2 = &net.layers()[1].weights;
        let out_total: f64 = (0..5).map(|h| w2.get(0, h).abs()).sum();
        let mut raw = [0.0; 3];
        for (j, slot) in raw.iter_mut().enumerate() {
            for h in 0..5 {
                let in_total: f64 = (0..3).map(|i| w1.get(h, i).abs()).sum();
                *slot += (w1.get(h, j).abs() / in_total) * (w2.get(0, h).abs() / out_total);
            }
        }
        let total: f64 = raw.iter().sum();
        let imp = garson_importance(&net).unwrap();
        for j in 0..3 {
            worst = worst.max((imp.values()[j] - raw[j] / total).abs());
        }
    }
    outcome(worst < 1e-10, format!("max abs diff {worst:.2e} on 20 random 3-5-1 nets (limit 1e-10)"))
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load_benchmark(name: &str) -> BenchmarkConfig {
    let path = config_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut table: toml::Table = toml::from_str(&text).unwrap();
    let section = table.remove("benchmark").expect("[benchmark] section");
    section.try_into().unwrap()
}

/// Shared 10-seed benchmark behind criteria 6, 7 and 9.
fn heavy_benchmark(cfg: &BenchmarkConfig) -> (BenchmarkResult, Duration) {
    let start = Instant::now();
    let result = with_jobs(1, || run_benchmark(cfg)).unwrap().unwrap();
    (result, start.elapsed())
}

fn sparsity_trend(cfg: &BenchmarkConfig, r: &BenchmarkResult, t: Duration) -> Outcome {
    let elim = trend_test(r, Metric::EliminatedFeatureFraction, Mode::Rln, Mode::DnnUniform).unwrap();
    let dense = r
        .rows
        .iter()
        .filter(|row| row.mode == Mode::Rln && row.network_zero_fraction > 0.5)
        .count();
    let minutes = secs(t) / 60.0;
    outcome(
        elim.wins >= 8 && dense >= 8 && minutes < 30.0,
        format!(
            "eliminated-feature wins {}/{} (need >= 8), RLN zero fraction > 0.5 on {dense}/{} seeds (need >= 8), \
             benchmark {minutes:.1} min single-threaded (target 30)",
            elim.wins, elim.n, cfg.n_seeds
        ),
    )
}

fn performance_trend(r: &BenchmarkResult) -> Outcome {
    let rows = |m: Mode| -> Vec<f64> { r.rows.iter().filter(|row| row.mode == m).map(|row| row.test_r2).collect() };
    let (a, b) = (rows(Mode::Rln), rows(Mode::DnnUniform));
    let ties_or_wins = a.iter().zip(&b).filter(|(x, y)| x >= y).count();
    let t = trend_test(r, Metric::TestR2, Mode::Rln, Mode::DnnUniform).unwrap();
    outcome(
        ties_or_wins >= 7 && t.mean_difference > 0.0,
        format!(
            "RLN test R^2 >= DNN on {ties_or_wins}/{} seeds (need >= 7), mean paired diff {:+.4} (need > 0)",
            a.len(),
            t.mean_difference
        ),
    )
}

fn entropy_trend(r: &BenchmarkResult) -> Outcome {
    // wins of DNN over RLN in entropy = seeds where RLN entropy is lower.
    let t = trend_test(r, Metric::ImportanceEntropy, Mode::DnnUniform, Mode::Rln).unwrap();
    let n_seeds = r.rows.iter().filter(|row| row.mode == Mode::Rln).count();
    outcome(
        t.wins >= 7,
        format!(
            "RLN entropy lower on {}/{n_seeds} seeds (need >= 7; {} seed pair(s) with defined entropy), mean DNN - RLN {:+.3} bits",
            t.wins, t.n, t.mean_difference
        ),
    )
}

/// Criterion 11: importance consistency across instantiations on benchmark seed 0.
fn js_consistency(cfg: &BenchmarkConfig, r: &BenchmarkResult) -> Outcome {
    let ds = benchmark_dataset(cfg, 0).unwrap().merge_validation_into_train();
    let mut js = Vec::new();
    for mode in [Mode::Rln, Mode::DnnUniform] {
        let row = r.rows.iter().find(|row| row.mode == mode && row.seed_index == 0).unwrap();
        let grid = &cfg.grids[&mode];
        let hidden: Vec<usize> = if row.best_hidden == "none" {
            Vec::new()
        } else {
            row.best_hidden.split('-').map(|v| v.parse().unwrap()).collect()
        };
        let train_cfg = TrainConfig {
            eta: row.best_eta,
            nu: row.best_nu,
            theta: row.best_theta,
            epochs: grid.epochs[0],
            batch_size: grid.batch_size[0],
            sparsity_epsilon: cfg.sparsity_epsilon,
            trajectory_edges: 0,
            seed: benchmark_train_seed(cfg, 0),
            ..TrainConfig::new(mode, cfg.norm)
        };
        let arch = mlp_arch(ds.n_features(), &hidden, cfg.activation);
        let (vectors, mean_js) = with_jobs(1, || importance_consistency(&ds, &arch, &train_cfg, 10, 0x5eed))
            .unwrap()
            .unwrap();
        assert_eq!(mean_pairwise_js(&vectors).unwrap(), mean_js);
        js.push(mean_js);
    }
    outcome(
        js[0] < js[1],
        format!("mean pairwise JSD over 10 instantiations: RLN {:.4} vs DNN {:.4} bits (need RLN < DNN)", js[0], js[1]),
    )
}

/// Criterion 12: two end-to-end runs produce byte-identical CSVs.
fn determinism() -> Outcome {
    let mut grids = std::collections::BTreeMap::new();
    let grid = Grid {
        hidden: vec![vec![8, 4]],
        eta: vec![0.01, 0.03],
        nu: vec![30.0, 100.0],
        theta: vec![-3.0],
        batch_size: vec![32],
        epochs: vec![15],
    };
    for mode in [Mode::Rln, Mode::DnnUniform, Mode::Linear] {
        grids.insert(mode, grid.clone());
    }
    let cfg = BenchmarkConfig {
        synth: SynthConfig {
            n_samples: 240,
            n_features: 20,
            n_informative: 5,
            decay: 0.5,
            interaction_pairs: 1,
            noise_r2: 0.3,
            seed: 0,
        },
        n_seeds: 3,
        master_seed: 12,
        grids,
        ..BenchmarkConfig::default()
    };
    // Different thread counts on purpose: results must not depend on scheduling.
    let a = with_jobs(1, || run_benchmark(&cfg)).unwrap().unwrap();
    let b = with_jobs(4, || run_benchmark(&cfg)).unwrap().unwrap();
    let same = a.rows_csv() == b.rows_csv()
        && a.aggregates_csv() == b.aggregates_csv()
        && a.leaderboards_csv() == b.leaderboards_csv();
    outcome(
        same,
        format!(
            "3-seed, 3-family benchmark run twice (1 and 4 threads): {} bytes of CSV compared",
            a.rows_csv().len() + a.aggregates_csv().len() + a.leaderboards_csv().len()
        ),
    )
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: u32| selected.is_empty() || selected.contains(&n);
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |n: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        if wanted(n) {
            let o = f();
            println!("[{}] {n:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            results.push((n, name, o));
        }
    };
    run(1, "counterfactual gradient identity", &theorem_identity);
    run(2, "backprop vs finite differences", &backprop_check);
    run(3, "projection invariant", &projection_invariant);
    run(4, "proximal oracle", &proximal_oracle);
    run(5, "degenerate equivalence (nu = 0)", &degenerate_equivalence);
    run(8, "ensemble Jensen bound", &jensen_bound);
    run(10, "Garson oracle", &garson_oracle);
    run(12, "benchmark determinism", &determinism);
    if [6, 7, 9, 11].iter().any(|&n| wanted(n)) {
        let cfg = load_benchmark("acceptance_benchmark.toml");
        let (bench, elapsed) = heavy_benchmark(&cfg);
        print!("{}", bench.summary());
        run(6, "sparsity trend", &|| sparsity_trend(&cfg, &bench, elapsed));
        run(7, "performance trend", &|| performance_trend(&bench));
        run(9, "importance entropy trend", &|| entropy_trend(&bench));
        run(11, "JS-divergence consistency trend", &|| js_consistency(&cfg, &bench));
    }
    results.sort_by_key(|r| r.0);
    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| format!("{} ({})", r.0, r.1)).collect();
    println!(
        "acceptance: {}/{} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
