//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//!
//! `QPRC_ACCEPTANCE_ONLY=1,2,3` restricts the run to the listed criteria (the MNIST
//! criteria 4 and 5 take about 20 minutes on one core). MNIST files are read from
//! `QPRC_MNIST_DIR`, defaulting to `data/mnist` at the workspace root.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use qprc_core::laplace::laplace_amplitude_oracle;
use qprc_core::pbg::FRACTIONAL_DECAY_PLATEAU;
use qprc_core::pseudomode::solve_on_grid;
use qprc_core::{
    evolve_amplitudes, sample_random_initial_conditions, solve_pbg_dynamics, AmplitudeVector, Kernel,
    LorentzianKernel, PbgKernel, ReservoirParams, SolverConfig,
};
use qprc_experiments::dynamics::{dynamics_seed, run_regression, RegressionProblem};
use qprc_experiments::heatmap::run_gamma_heatmap;
use qprc_experiments::mnist::{crossover, run_mnist_sweep, SweepPlan};
use qprc_experiments::run::execute;
use qprc_experiments::stats::pooled_std;
use qprc_experiments::{ExperimentConfig, TargetKind, Task};
use qprc_mnist::{parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels, Image, Mnist};
use qprc_readout::{BatchTargets, DenseLayer, ReadoutNet};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(a: &AmplitudeVector, b: &AmplitudeVector) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn distance(a: &AmplitudeVector, b: &AmplitudeVector) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn default_params(n: usize) -> ReservoirParams {
    ReservoirParams::mnist_default(n)
}

fn oracle_equivalence() -> Outcome {
    let times: Vec<f64> = (0..=500).map(|k| k as f64 * 0.1).collect();
    let mut worst = 0.0f64;
    for n in [1usize, 2, 4, 8] {
        let params = default_params(n);
        let kernel = LorentzianKernel::new(params.lam, params.gamma).unwrap();
        for c0 in sample_random_initial_conditions(n, 20, 100 + n as u64).unwrap() {
            let ode = solve_on_grid(&c0, &kernel, params.dipole, &times).unwrap();
            for (&t, from_ode) in times.iter().zip(ode.samples()) {
                worst = worst.max(max_abs(&evolve_amplitudes(&c0, &params, t).unwrap(), from_ode));
            }
        }
    }
    outcome(worst < 1e-8, format!("max |closed form − pseudomode ODE| = {worst:.2e} (bound 1e-8)"))
}

fn band_edge_solver() -> Outcome {
    let kernel = PbgKernel::experiment_default();
    let c0 = sample_random_initial_conditions(2, 1, 11).unwrap().remove(0);
    let final_state = |dt: f64| {
        let traj = solve_pbg_dynamics(&c0, &kernel, 0.1, &SolverConfig::new(dt, 20.0).unwrap()).unwrap();
        traj.samples().last().unwrap().clone()
    };
    let (a, b, cc) = (final_state(0.04), final_state(0.02), final_state(0.01));
    let order = (distance(&a, &b) / distance(&b, &cc)).log2();

    let times = [1.0, 10.0, 100.0];
    let mut worst = 0.0f64;
    for n in [1usize, 2] {
        let c0 = sample_random_initial_conditions(n, 1, 40 + n as u64).unwrap().remove(0);
        let oracle = laplace_amplitude_oracle(&c0, &Kernel::from(kernel), 0.1, &times).unwrap();
        let traj = solve_pbg_dynamics(&c0, &kernel, 0.1, &SolverConfig::new(0.00125, 100.0).unwrap()).unwrap();
        for (got, want) in traj.resample(&times).unwrap().samples().iter().zip(&oracle) {
            worst = worst.max(distance(got, want) / want.norm_sqr().sqrt());
        }
    }
    outcome(
        (order - 2.0).abs() <= 0.3 && worst < 1e-4,
        format!("observed order {order:.3} (2 ± 0.3); max relative error vs contour oracle {worst:.2e} (bound 1e-4)"),
    )
}

fn fractional_decay() -> Outcome {
    let c0 = AmplitudeVector::new(vec![c(1.0, 0.0)]).unwrap();
    let cavity = evolve_amplitudes(&c0, &ReservoirParams::new(1, 0.25, 0.2, 0.1).unwrap(), 100.0).unwrap().norm_sqr();
    let kernel = PbgKernel::experiment_default();
    let traj = solve_pbg_dynamics(&c0, &kernel, 0.1, &SolverConfig::new(0.01, 100.0).unwrap()).unwrap();
    let band_edge = traj.samples().last().unwrap().norm_sqr();
    outcome(
        cavity < 1e-2 && band_edge > FRACTIONAL_DECAY_PLATEAU,
        format!("cavity population {cavity:.2e} (< 1e-2); band-edge population {band_edge:.4} (> {FRACTIONAL_DECAY_PLATEAU})"),
    )
}

fn mnist_dir() -> PathBuf {
    std::env::var_os("QPRC_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

fn mnist_criteria() -> (Outcome, Outcome) {
    let dir = mnist_dir();
    let mnist = match Mnist::load_dir(&dir) {
        Ok(m) => m,
        Err(e) => {
            let why = format!("MNIST unavailable in {}: {e} (run scripts/fetch_mnist.sh)", dir.display());
            return (outcome(false, why.clone()), outcome(false, why));
        }
    };
    let cfg = ExperimentConfig::for_task(Task::MnistSizeSweep);
    let sweep = run_mnist_sweep(&cfg, &mnist.train, &mnist.test, &SweepPlan::combined(&cfg), &|line| {
        eprintln!("    {line}")
    })
    .expect("MNIST sweep");

    let by_size = sweep.by_size(&cfg.sizes, cfg.epochs);
    let (q, b) = (by_size.curve("qprc").unwrap(), by_size.curve("baseline").unwrap());
    let mut rows = Vec::new();
    let mut large_ok = true;
    let mut at_5000 = None;
    for (qp, bp) in q.points.iter().zip(&b.points) {
        rows.push(format!("{}: {:.4}±{:.4} vs {:.4}±{:.4}", qp.x, qp.mean, qp.std, bp.mean, bp.std));
        if qp.x >= 2000.0 {
            large_ok &= qp.mean >= bp.mean;
        }
        if qp.x == 5000.0 {
            at_5000 = Some((qp.mean, bp.mean));
        }
    }
    let top_ok = at_5000.is_some_and(|(qm, bm)| qm >= 0.88 && qm >= bm);
    let cross = crossover(&by_size).map_or("none".to_string(), |x| x.to_string());
    let size = outcome(
        top_ok && large_ok,
        format!("qprc vs baseline mean±std by size [{}]; crossover at {cross}", rows.join("; ")),
    );

    let by_epoch = sweep.by_epoch(cfg.epoch_sweep_size, &cfg.epoch_list);
    let (q, b) = (by_epoch.curve("qprc").unwrap(), by_epoch.curve("baseline").unwrap());
    let mut rows = Vec::new();
    let mut ok = true;
    for (qp, bp) in q.points.iter().zip(&b.points) {
        let floor = bp.mean - pooled_std(qp.std, bp.std);
        ok &= qp.mean >= floor;
        rows.push(format!("{}: {:.4} vs floor {:.4}", qp.x, qp.mean, floor));
    }
    let epochs = outcome(ok, format!("size {} qprc mean vs baseline − pooled std [{}]", cfg.epoch_sweep_size, rows.join("; ")));
    (size, epochs)
}

fn dynamics_regression() -> Outcome {
    let cfg = ExperimentConfig::for_task(Task::PbgRegression);
    let problem = RegressionProblem::from_config(&cfg).unwrap();
    let band_edge = run_regression(&cfg, &problem, dynamics_seed(&cfg)).unwrap();
    let identity_cfg = ExperimentConfig { target: TargetKind::Identity, ..cfg.clone() };
    let problem = RegressionProblem::from_config(&identity_cfg).unwrap();
    let identity = run_regression(&identity_cfg, &problem, dynamics_seed(&identity_cfg)).unwrap();
    outcome(
        band_edge.test_mse <= 1e-5 && identity.test_mse < 1e-6,
        format!(
            "band-edge test MSE {:.2e} (≤ 1e-5, mean log10 {:.2}); identity test MSE {:.2e} (< 1e-6)",
            band_edge.test_mse, band_edge.mean_log10_error, identity.test_mse
        ),
    )
}

fn run_time_benefit() -> Outcome {
    let cfg = ExperimentConfig::for_task(Task::GammaHeatmap);
    let map = run_gamma_heatmap(&cfg).unwrap();
    let k10 = map.run_times.iter().position(|&t| t == 10.0).unwrap();
    let k100 = map.run_times.iter().position(|&t| t == 100.0).unwrap();
    let (m10, m100) = (map.grid_mean(k10), map.grid_mean(k100));
    outcome(
        m100 <= m10,
        format!(
            "mean log10 error T=100: {m100:.3}, T=10: {m10:.3}; diagonal soft check rows failing: T=10 {:?}, T=100 {:?}",
            map.diagonal_violations(k10),
            map.diagonal_violations(k100)
        ),
    )
}

/// `‖g_fd − g‖ / ‖g‖` over every parameter, central differences with `h = 1e-6`.
fn gradient_error(net: &ReadoutNet<f64>, x: &Array2<f64>, targets: BatchTargets<f64>) -> f64 {
    let (_, grads) = net.loss_and_gradients(x.view(), targets).unwrap();
    let loss_with = |layers: Vec<DenseLayer<f64>>| {
        let probe = ReadoutNet::new(layers, net.head()).unwrap();
        probe.loss_and_gradients(x.view(), targets).unwrap().0
    };
    let h = 1e-6;
    let (mut diff, mut norm) = (0.0, 0.0);
    for (k, layer) in net.layers().iter().enumerate() {
        for idx in 0..layer.weights.len() + layer.biases.len() {
            let shift = |delta: f64| {
                let mut layers = net.layers().to_vec();
                let l = &mut layers[k];
                if idx < l.weights.len() {
                    let cols = l.weights.ncols();
                    l.weights[[idx / cols, idx % cols]] += delta;
                } else {
                    l.biases[idx - l.weights.len()] += delta;
                }
                loss_with(layers)
            };
            let fd = (shift(h) - shift(-h)) / (2.0 * h);
            let analytic = if idx < layer.weights.len() {
                grads.weights[k].as_slice().unwrap()[idx]
            } else {
                grads.biases[k][idx - layer.weights.len()]
            };
            diff += (fd - analytic).powi(2);
            norm += analytic.powi(2);
        }
    }
    (diff / norm).sqrt()
}

fn property_suites() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // Gradients.
    let x = Array2::from_shape_fn((5, 6), |(r, c)| ((r * 7 + c * 3) as f64).sin());
    let classifier = ReadoutNet::<f64>::classifier(6, 4, 3, 9).unwrap();
    let labels = [0usize, 2, 1, 1, 0];
    let g1 = gradient_error(&classifier, &x, BatchTargets::Classes(&labels));
    let regressor = ReadoutNet::<f64>::regressor(6, 4, 3, 9).unwrap();
    let y = Array2::from_shape_fn((5, 3), |(r, c)| ((r + 2 * c) as f64).cos() * 0.5);
    let g2 = gradient_error(&regressor, &x, BatchTargets::Values(y.view()));
    ok &= g1 < 1e-5 && g2 < 1e-5;
    notes.push(format!("gradient rel. err {:.1e}/{:.1e}", g1, g2));

    // Closed-form structure.
    let params = default_params(4);
    let states = sample_random_initial_conditions(4, 3, 77).unwrap();
    let (a, b) = (&states[0], &states[1]);
    let (alpha, beta) = (c(0.3, -0.2), c(-0.1, 0.4));
    let mix = AmplitudeVector::new(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| alpha * x + beta * y).collect()).unwrap();
    let perm = [2usize, 0, 3, 1];
    let permuted = AmplitudeVector::new(perm.iter().map(|&p| states[2].as_slice()[p]).collect()).unwrap();
    let diff_mode = AmplitudeVector::new(vec![c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5)]).unwrap();
    let mut structural = 0.0f64;
    for t in [0.7, 5.0, 31.0] {
        let (ea, eb) = (evolve_amplitudes(a, &params, t).unwrap(), evolve_amplitudes(b, &params, t).unwrap());
        let combined: Vec<Complex64> = ea.as_slice().iter().zip(eb.as_slice()).map(|(x, y)| alpha * x + beta * y).collect();
        structural = structural.max(max_abs(&evolve_amplitudes(&mix, &params, t).unwrap(), &AmplitudeVector::new(combined).unwrap()));
        let ep = evolve_amplitudes(&states[2], &params, t).unwrap();
        let expected = AmplitudeVector::new(perm.iter().map(|&p| ep.as_slice()[p]).collect()).unwrap();
        structural = structural.max(max_abs(&evolve_amplitudes(&permuted, &params, t).unwrap(), &expected));
        let phase = c(0.0, params.dipole * t).exp();
        let rotated = AmplitudeVector::new(diff_mode.as_slice().iter().map(|v| v * phase).collect()).unwrap();
        structural = structural.max(max_abs(&evolve_amplitudes(&diff_mode, &params, t).unwrap(), &rotated));
    }
    ok &= structural < 1e-12;
    notes.push(format!("linearity/permutation/difference-mode max dev {structural:.1e}"));

    // Softmax.
    let wide = Array2::from_shape_fn((4, 6), |(r, c)| 40.0 * ((r * 5 + c) as f64).sin());
    let probs = classifier.forward_batch(wide.view()).unwrap();
    let softmax_dev = probs.rows().into_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let nonneg = probs.iter().all(|&p| (0.0..=1.0).contains(&p));
    ok &= softmax_dev < 1e-12 && nonneg;
    notes.push(format!("softmax |Σp − 1| {softmax_dev:.1e}"));

    // IDX round trip.
    let images: Vec<Image> = (0..7).map(|k| std::array::from_fn(|p| ((p * 31 + k * 17) % 256) as u8)).collect();
    let labels: Vec<u8> = (0..7).map(|k| (k * 3 % 10) as u8).collect();
    let (ib, lb) = (write_idx_images(&images), write_idx_labels(&labels));
    let mut idx_ok = write_idx_images(&parse_idx_images(&ib).unwrap()) == ib && write_idx_labels(&parse_idx_labels(&lb).unwrap()) == lb;
    let official = mnist_dir().join(qprc_mnist::TEST_IMAGES);
    if let Ok(bytes) = std::fs::read(&official) {
        idx_ok &= write_idx_images(&parse_idx_images(&bytes).unwrap()) == bytes;
        notes.push("IDX round trip incl. official test file".into());
    } else {
        notes.push("IDX round trip (synthetic only)".into());
    }
    ok &= idx_ok;

    // Whole-run determinism.
    let deterministic = [determinism(Task::PbgRegression), determinism(Task::GammaHeatmap), determinism(Task::Simulate), mnist_determinism()]
        .into_iter()
        .all(|d| d);
    ok &= deterministic;
    notes.push(format!("byte-identical reruns: {deterministic}"));
    outcome(ok, notes.join("; "))
}

fn small(task: Task, out: PathBuf) -> ExperimentConfig {
    ExperimentConfig {
        task,
        output_dir: out,
        train_size: 80,
        test_size: 20,
        regression_epochs: 3,
        heatmap_epochs: 2,
        heatmap_gammas_res: vec![0.2, 0.5],
        heatmap_gammas_target: vec![0.2, 0.5],
        heatmap_run_times: vec![10.0, 100.0],
        n_steps: 10,
        sim_t_max: 10.0,
        ..ExperimentConfig::for_task(task)
    }
}

fn same_outputs(cfg_a: &ExperimentConfig, cfg_b: &ExperimentConfig) -> bool {
    let (ma, mb) = (execute(cfg_a, &|_| {}).unwrap(), execute(cfg_b, &|_| {}).unwrap());
    ma.outputs == mb.outputs
        && ma.outputs.iter().filter(|n| *n != "manifest.json").all(|name| {
            std::fs::read(cfg_a.output_dir.join(name)).unwrap() == std::fs::read(cfg_b.output_dir.join(name)).unwrap()
        })
}

fn determinism(task: Task) -> bool {
    let dir = tempfile::tempdir().unwrap();
    let a = small(task, dir.path().join("a"));
    let b = ExperimentConfig { output_dir: dir.path().join("b"), ..a.clone() };
    same_outputs(&a, &b)
}

fn mnist_determinism() -> bool {
    let images: Vec<Image> = (0..120)
        .map(|k| std::array::from_fn(|p| if p / 78 == k % 10 { 120 + (k % 5) as u8 * 20 } else { (p % 3) as u8 }))
        .collect();
    let labels: Vec<u8> = (0..120).map(|k| (k % 10) as u8).collect();
    let set = qprc_mnist::LabeledImageSet::new("toy", images, labels).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir_all(&data).unwrap();
    let (ib, lb) = set.to_idx_bytes();
    for (name, bytes) in [
        (qprc_mnist::TRAIN_IMAGES, &ib),
        (qprc_mnist::TEST_IMAGES, &ib),
        (qprc_mnist::TRAIN_LABELS, &lb),
        (qprc_mnist::TEST_LABELS, &lb),
    ] {
        std::fs::write(data.join(name), bytes).unwrap();
    }
    let a = ExperimentConfig {
        data_dir: data,
        sizes: vec![50],
        epochs: 2,
        repetitions: 2,
        hidden: 8,
        n_steps: 3,
        ..small(Task::MnistSizeSweep, dir.path().join("a"))
    };
    let b = ExperimentConfig { output_dir: dir.path().join("b"), ..a.clone() };
    same_outputs(&a, &b)
}

fn main() -> ExitCode {
    let only: Option<BTreeSet<usize>> = std::env::var("QPRC_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let wanted = |k: usize| only.as_ref().is_none_or(|set| set.contains(&k));

    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let report = |results: &mut Vec<(usize, Outcome)>, k: usize, name: &str, o: Outcome, timing: String| {
        println!("{} criterion {k} ({name}): {} [{timing}]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, o));
    };
    let quick: [(usize, &str, fn() -> Outcome); 3] = [
        (1, "oracle equivalence", oracle_equivalence),
        (2, "band-edge solver validity", band_edge_solver),
        (3, "fractional decay contrast", fractional_decay),
    ];
    let rest: [(usize, &str, fn() -> Outcome); 3] = [
        (6, "dynamics regression", dynamics_regression),
        (7, "reservoir run-time benefit", run_time_benefit),
        (8, "property suites", property_suites),
    ];
    let run = |results: &mut Vec<(usize, Outcome)>, list: &[(usize, &str, fn() -> Outcome)]| {
        for &(k, name, f) in list.iter().filter(|(k, ..)| wanted(*k)) {
            let start = Instant::now();
            let o = f();
            report(results, k, name, o, format!("{:.1} s", start.elapsed().as_secs_f64()));
        }
    };
    run(&mut results, &quick);
    if wanted(4) || wanted(5) {
        let start = Instant::now();
        let (size, epochs) = mnist_criteria();
        let timing = format!("{:.1} s for both sweeps", start.elapsed().as_secs_f64());
        for (k, name, o) in [(4, "MNIST size sweep", size), (5, "MNIST epoch sweep", epochs)] {
            if wanted(k) {
                report(&mut results, k, name, o, timing.clone());
            }
        }
    }
    run(&mut results, &rest);

    let failed: Vec<usize> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
