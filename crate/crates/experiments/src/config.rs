//! Flat `key = value` experiment configuration. Lines starting with `#` are
//! comments; lists are comma separated; every physical quantity is in units of ω₀.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Simulate,
    MnistSizeSweep,
    MnistEpochSweep,
    PbgRegression,
    GammaHeatmap,
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Task::Simulate,
            "mnist-size-sweep" => Task::MnistSizeSweep,
            "mnist-epoch-sweep" => Task::MnistEpochSweep,
            "pbg-regression" => Task::PbgRegression,
            "gamma-heatmap" => Task::GammaHeatmap,
            other => return Err(Error::Config(format!("unknown task `{other}`"))),
        })
    }
}

/// Dynamics that a regression head learns to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Pbg,
    Lorentzian,
    /// The reservoir's own trajectory: a sanity task with a known exact answer.
    Identity,
}

impl FromStr for TargetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pbg" => TargetKind::Pbg,
            "lorentzian" => TargetKind::Lorentzian,
            "identity" => TargetKind::Identity,
            other => return Err(Error::Config(format!("unknown target `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    pub repetitions: usize,
    pub output_dir: PathBuf,
    pub data_dir: PathBuf,
    /// Worker threads; 0 picks one per core.
    pub threads: usize,

    // Reservoir.
    pub lam: f64,
    pub gamma: f64,
    pub dipole: f64,
    pub n_steps: usize,

    // MNIST.
    pub mnist_t_max: f64,
    pub sizes: Vec<usize>,
    pub epochs: usize,
    pub epoch_list: Vec<usize>,
    pub epoch_sweep_size: usize,
    pub hidden: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Number of test images scored; 0 uses the whole test split.
    pub test_limit: usize,

    // Dynamics regression.
    pub n_atoms: usize,
    pub reservoir_t_max: f64,
    pub target: TargetKind,
    pub beta: f64,
    pub delta: f64,
    pub target_lam: f64,
    pub target_gamma: f64,
    pub target_t_max: f64,
    pub dt: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub regression_epochs: usize,
    pub regression_lr: f64,
    /// Final learning rate as a fraction of the initial one.
    pub regression_lr_decay: f64,
    pub regression_batch_size: usize,
    pub overlay_samples: usize,

    // Heatmap.
    pub heatmap_gammas_res: Vec<f64>,
    pub heatmap_gammas_target: Vec<f64>,
    pub heatmap_run_times: Vec<f64>,
    pub heatmap_epochs: usize,
    /// Target window of the heatmap; 0 uses each cell's reservoir run time.
    pub heatmap_target_t_max: f64,

    // Simulation.
    pub system: TargetKind,
    pub sim_atoms: usize,
    pub sim_t_max: f64,
    pub sim_dt: f64,
    /// Output rows after `t = 0`.
    pub sim_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Simulate,
            seed: 2024,
            repetitions: 5,
            output_dir: PathBuf::from("out"),
            data_dir: PathBuf::from("data/mnist"),
            threads: 0,
            lam: 0.25,
            gamma: 0.2,
            dipole: 0.1,
            n_steps: 50,
            mnist_t_max: 50.0,
            sizes: vec![200, 500, 900, 2000, 5000],
            epochs: 30,
            epoch_list: vec![1, 5, 10, 20, 30],
            epoch_sweep_size: 2000,
            hidden: 128,
            batch_size: 32,
            lr: 1e-3,
            test_limit: 0,
            n_atoms: 2,
            reservoir_t_max: 10.0,
            target: TargetKind::Pbg,
            beta: 1.0,
            delta: 0.0,
            target_lam: 0.25,
            target_gamma: 0.2,
            target_t_max: 10.0,
            dt: 0.0025,
            train_size: 1500,
            test_size: 200,
            regression_epochs: 400,
            regression_lr: 1e-3,
            regression_lr_decay: 0.01,
            regression_batch_size: 32,
            overlay_samples: 3,
            heatmap_gammas_res: vec![0.1, 0.2, 0.5, 1.0],
            heatmap_gammas_target: vec![0.1, 0.2, 0.5, 1.0],
            heatmap_run_times: vec![10.0, 100.0],
            heatmap_epochs: 400,
            heatmap_target_t_max: 0.0,
            system: TargetKind::Pbg,
            sim_atoms: 1,
            sim_t_max: 100.0,
            sim_dt: 0.01,
            sim_points: 200,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Error::Config(format!("{key} = `{value}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

impl ExperimentConfig {
    /// Defaults for `task`.
    pub fn for_task(task: Task) -> Self {
        Self { task, ..Self::default() }
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "task" => self.task = v.parse()?,
            "seed" => self.seed = parse(key, v)?,
            "repetitions" => self.repetitions = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "data_dir" => self.data_dir = PathBuf::from(v),
            "threads" => self.threads = parse(key, v)?,
            "lam" => self.lam = parse(key, v)?,
            "gamma" => self.gamma = parse(key, v)?,
            "dipole" => self.dipole = parse(key, v)?,
            "n_steps" => self.n_steps = parse(key, v)?,
            "mnist_t_max" => self.mnist_t_max = parse(key, v)?,
            "sizes" => self.sizes = parse_list(key, v)?,
            "epochs" => self.epochs = parse(key, v)?,
            "epoch_list" => self.epoch_list = parse_list(key, v)?,
            "epoch_sweep_size" => self.epoch_sweep_size = parse(key, v)?,
            "hidden" => self.hidden = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "lr" => self.lr = parse(key, v)?,
            "test_limit" => self.test_limit = parse(key, v)?,
            "n_atoms" => self.n_atoms = parse(key, v)?,
            "reservoir_t_max" => self.reservoir_t_max = parse(key, v)?,
            "target" => self.target = v.parse()?,
            "beta" => self.beta = parse(key, v)?,
            "delta" => self.delta = parse(key, v)?,
            "target_lam" => self.target_lam = parse(key, v)?,
            "target_gamma" => self.target_gamma = parse(key, v)?,
            "target_t_max" => self.target_t_max = parse(key, v)?,
            "dt" => self.dt = parse(key, v)?,
            "train_size" => self.train_size = parse(key, v)?,
            "test_size" => self.test_size = parse(key, v)?,
            "regression_epochs" => self.regression_epochs = parse(key, v)?,
            "regression_lr" => self.regression_lr = parse(key, v)?,
            "regression_lr_decay" => self.regression_lr_decay = parse(key, v)?,
            "regression_batch_size" => self.regression_batch_size = parse(key, v)?,
            "overlay_samples" => self.overlay_samples = parse(key, v)?,
            "heatmap_gammas_res" => self.heatmap_gammas_res = parse_list(key, v)?,
            "heatmap_gammas_target" => self.heatmap_gammas_target = parse_list(key, v)?,
            "heatmap_run_times" => self.heatmap_run_times = parse_list(key, v)?,
            "heatmap_epochs" => self.heatmap_epochs = parse(key, v)?,
            "heatmap_target_t_max" => self.heatmap_target_t_max = parse(key, v)?,
            "system" => self.system = v.parse()?,
            "sim_atoms" => self.sim_atoms = parse(key, v)?,
            "sim_t_max" => self.sim_t_max = parse(key, v)?,
            "sim_dt" => self.sim_dt = parse(key, v)?,
            "sim_points" => self.sim_points = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return fail("sizes must be a non-empty list of positive integers");
        }
        if self.epoch_list.is_empty() || self.epoch_list.contains(&0) {
            return fail("epoch_list must be a non-empty list of positive integers");
        }
        if self.epochs == 0 || self.regression_epochs == 0 || self.heatmap_epochs == 0 {
            return fail("epoch counts must be at least 1");
        }
        if self.n_steps == 0 || self.hidden == 0 || self.batch_size == 0 || self.regression_batch_size == 0 {
            return fail("n_steps, hidden and batch sizes must be at least 1");
        }
        if self.n_atoms == 0 || self.sim_atoms == 0 || self.sim_points == 0 {
            return fail("atom counts must be at least 1");
        }
        if self.train_size == 0 || self.test_size == 0 {
            return fail("train_size and test_size must be at least 1");
        }
        if self.heatmap_gammas_res.is_empty() || self.heatmap_gammas_target.is_empty() || self.heatmap_run_times.is_empty() {
            return fail("heatmap lists must be non-empty");
        }
        let positive = [self.mnist_t_max, self.reservoir_t_max, self.target_t_max, self.dt, self.sim_t_max, self.sim_dt];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return fail("times and steps must be positive and finite");
        }
        let all_times = self.heatmap_run_times.iter().chain(&self.heatmap_gammas_res).chain(&self.heatmap_gammas_target);
        if all_times.clone().any(|v| !(*v > 0.0 && v.is_finite())) {
            return fail("heatmap run times and widths must be positive");
        }
        Ok(())
    }
}
