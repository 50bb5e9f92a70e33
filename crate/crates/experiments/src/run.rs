//! Task dispatch: runs one configured experiment and writes its CSVs and a
//! `manifest.json` (config echo, seeds, outputs, summary) to the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use qprc_mnist::Mnist;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Task};
use crate::dynamics::{dynamics_seed, run_regression, RegressionProblem};
use crate::error::{Error, Result};
use crate::heatmap::run_gamma_heatmap;
use crate::mnist::{crossover, mnist_seed, run_mnist_sweep, SweepPlan};
use crate::simulate::run_simulate;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub task: Task,
    pub config: ExperimentConfig,
    pub run_seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub summary: Value,
}

struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.names.push(name.to_string());
        Ok(())
    }
}

fn load_mnist(dir: &Path) -> Result<Mnist> {
    Ok(Mnist::load_dir(dir)?)
}

/// Runs `cfg.task` in a pool of `cfg.threads` workers (0: one per core).
pub fn execute(cfg: &ExperimentConfig, progress: &(dyn Fn(&str) + Sync)) -> Result<Manifest> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute_in_pool(cfg, progress))
}

fn execute_in_pool(cfg: &ExperimentConfig, progress: &(dyn Fn(&str) + Sync)) -> Result<Manifest> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let mut out = Outputs { dir: cfg.output_dir.clone(), names: Vec::new() };
    let mut run_seeds = Vec::new();
    let summary = match cfg.task {
        Task::Simulate => {
            let traj = run_simulate(cfg)?;
            let mut csv = Vec::new();
            traj.write_population_csv(&mut csv).map_err(Error::Dynamics)?;
            out.write("populations.csv", &String::from_utf8(csv).expect("ascii csv"))?;
            let last = traj.samples().last().map(|s| s.populations()).unwrap_or_default();
            json!({ "final_time": traj.times().last(), "final_populations": last })
        }
        Task::MnistSizeSweep | Task::MnistEpochSweep => {
            let mnist = load_mnist(&cfg.data_dir)?;
            let plan = match cfg.task {
                Task::MnistSizeSweep => SweepPlan::size_sweep(cfg),
                _ => SweepPlan::epoch_sweep(cfg),
            };
            for (size, _) in &plan.points {
                run_seeds.extend((0..plan.repetitions).map(|r| mnist_seed(cfg.seed, *size, r)));
            }
            let sweep = run_mnist_sweep(cfg, &mnist.train, &mnist.test, &plan, progress)?;
            if cfg.task == Task::MnistSizeSweep {
                let result = sweep.by_size(&cfg.sizes, cfg.epochs);
                out.write("mnist_size_sweep.csv", &result.to_csv())?;
                json!({ "sweep": result, "crossover_size": crossover(&result) })
            } else {
                let result = sweep.by_epoch(cfg.epoch_sweep_size, &cfg.epoch_list);
                out.write("mnist_epoch_sweep.csv", &result.to_csv())?;
                json!({ "sweep": result })
            }
        }
        Task::PbgRegression => {
            let seed = dynamics_seed(cfg);
            run_seeds.push(seed);
            let problem = RegressionProblem::from_config(cfg)?;
            let report = run_regression(cfg, &problem, seed)?;
            out.write("regression_overlay.csv", &report.overlay_csv())?;
            out.write("regression_log10_errors.csv", &report.error_csv())?;
            progress(&format!("test MSE {:.3e}", report.test_mse));
            json!({
                "target": cfg.target,
                "train_mse": report.train_mse,
                "test_mse": report.test_mse,
                "mean_log10_error": report.mean_log10_error,
                "final_epoch_loss": report.epoch_losses.last(),
            })
        }
        Task::GammaHeatmap => {
            run_seeds.push(dynamics_seed(cfg));
            let map = run_gamma_heatmap(cfg)?;
            let mut grids = Vec::new();
            for (k, t) in map.run_times.iter().enumerate() {
                out.write(&format!("heatmap_T{t}.csv"), &map.to_csv(k))?;
                grids.push(json!({
                    "run_time": t,
                    "mean_log10_error": map.grid_mean(k),
                    "diagonal_violations": map.diagonal_violations(k),
                }));
            }
            json!({ "grids": grids, "errors": map.errors })
        }
    };
    let manifest = Manifest {
        tool: "qprc",
        version: env!("CARGO_PKG_VERSION"),
        task: cfg.task,
        config: cfg.clone(),
        run_seeds,
        outputs: out.names.clone(),
        summary,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    // Written last and not listed in its own outputs.
    let path = cfg.output_dir.join(MANIFEST);
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
