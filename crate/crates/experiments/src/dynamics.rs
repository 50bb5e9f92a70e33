//! Learning the map from a reservoir's response to the dynamics of another system
//! started from the same initial condition.

use ndarray::Array2;
use num_complex::Complex64;
use qprc_core::{
    sample_random_initial_conditions, solve_pbg_dynamics, AmplitudeVector, PbgKernel, ReservoirFeatureMap,
    ReservoirParams, SolverConfig,
};
use qprc_readout::{per_sample_errors, train, ReadoutNet, RegressionData, TrainConfig};
use serde::Serialize;

use crate::config::{ExperimentConfig, TargetKind};
use crate::error::{Error, Result};
use crate::seed::{run_seed, Coord};

/// A linear map `c0 ↦` flattened trajectory in feature layout.
#[derive(Debug, Clone)]
pub enum TargetMap {
    Reservoir(ReservoirFeatureMap),
    /// Responses to the basis states `e_k`, superposed by linearity.
    Basis { n_atoms: usize, columns: Vec<Vec<Complex64>> },
}

impl TargetMap {
    /// Band-edge dynamics on the grid `t_j = j·t_max/n_steps`. The time step must
    /// divide the grid spacing.
    pub fn pbg(kernel: &PbgKernel, dipole: f64, n_atoms: usize, n_steps: usize, t_max: f64, dt: f64) -> Result<Self> {
        let spacing = t_max / n_steps as f64;
        let ratio = spacing / dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio.round() < 1.0 {
            return Err(Error::Config(format!("dt = {dt} must divide the sampling interval {spacing}")));
        }
        let cfg = SolverConfig::new(dt, t_max)?;
        let times = qprc_core::reservoir::sample_times(n_steps, t_max);
        let columns = (0..n_atoms)
            .map(|k| {
                let mut e = vec![Complex64::new(0.0, 0.0); n_atoms];
                e[k] = Complex64::new(1.0, 0.0);
                let traj = solve_pbg_dynamics(&AmplitudeVector::new(e)?, kernel, dipole, &cfg)?.resample(&times)?;
                Ok(traj.samples().iter().flat_map(|s| s.as_slice().iter().copied()).collect())
            })
            .collect::<Result<_>>()?;
        Ok(TargetMap::Basis { n_atoms, columns })
    }

    pub fn output_len(&self) -> usize {
        match self {
            TargetMap::Reservoir(map) => map.feature_len(),
            TargetMap::Basis { columns, .. } => 2 * columns[0].len(),
        }
    }

    pub fn write<T>(&self, c0: &AmplitudeVector, out: &mut [T], cast: impl Fn(f64) -> T) -> Result<()> {
        match self {
            TargetMap::Reservoir(map) => Ok(map.write_features_as(c0, out, cast)?),
            TargetMap::Basis { n_atoms, columns } => {
                if c0.len() != *n_atoms {
                    return Err(qprc_core::Error::DimensionMismatch { expected: *n_atoms, got: c0.len() }.into());
                }
                for (m, pair) in out.chunks_exact_mut(2).take(columns[0].len()).enumerate() {
                    let v: Complex64 = c0.as_slice().iter().zip(columns).map(|(c, col)| c * col[m]).sum();
                    pair[0] = cast(v.re);
                    pair[1] = cast(v.im);
                }
                Ok(())
            }
        }
    }
}

/// Reservoir and target maps of one regression problem.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub reservoir: ReservoirFeatureMap,
    pub target: TargetMap,
    pub target_times: Vec<f64>,
}

impl RegressionProblem {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Self::build(cfg, cfg.gamma, cfg.target_gamma)
    }

    /// The problem with the given reservoir and target spectral widths.
    pub fn build(cfg: &ExperimentConfig, gamma_res: f64, gamma_target: f64) -> Result<Self> {
        let run_time = cfg.reservoir_t_max;
        let res_params = ReservoirParams::new(cfg.n_atoms, cfg.lam, gamma_res, cfg.dipole)?;
        let reservoir = ReservoirFeatureMap::new(&res_params, cfg.n_steps, run_time)?;
        let (target, target_times) = match cfg.target {
            TargetKind::Identity => (TargetMap::Reservoir(reservoir.clone()), reservoir.times().to_vec()),
            TargetKind::Lorentzian => {
                let params = ReservoirParams::new(cfg.n_atoms, cfg.target_lam, gamma_target, cfg.dipole)?;
                let map = ReservoirFeatureMap::new(&params, cfg.n_steps, cfg.target_t_max)?;
                let times = map.times().to_vec();
                (TargetMap::Reservoir(map), times)
            }
            TargetKind::Pbg => {
                let kernel = PbgKernel::new(cfg.beta, cfg.delta)?;
                let map = TargetMap::pbg(&kernel, cfg.dipole, cfg.n_atoms, cfg.n_steps, cfg.target_t_max, cfg.dt)?;
                (map, qprc_core::reservoir::sample_times(cfg.n_steps, cfg.target_t_max))
            }
        };
        Ok(Self { reservoir, target, target_times })
    }

    /// Inputs and targets for `states`, one row each.
    pub fn dataset(&self, states: &[AmplitudeVector]) -> Result<RegressionData<f32>> {
        let mut inputs = Array2::zeros((states.len(), self.reservoir.feature_len()));
        let mut targets = Array2::zeros((states.len(), self.target.output_len()));
        for (k, c0) in states.iter().enumerate() {
            let row = inputs.row_mut(k).into_slice().expect("standard layout");
            self.reservoir.write_features_as(c0, row, |v| v as f32)?;
            self.target.write(c0, targets.row_mut(k).into_slice().expect("standard layout"), |v| v as f32)?;
        }
        Ok(RegressionData { inputs, targets })
    }
}

/// Predicted and true trajectories of one test sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlay {
    pub sample: usize,
    pub truth: Vec<f64>,
    pub prediction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub seed: u64,
    pub train_mse: f64,
    pub test_mse: f64,
    /// `log₁₀` of each test sample's mean squared error.
    pub log10_errors: Vec<f64>,
    pub mean_log10_error: f64,
    pub epoch_losses: Vec<f64>,
    pub target_times: Vec<f64>,
    pub overlays: Vec<Overlay>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Trains the regression head of `problem` on `train_size` Haar-random initial
/// conditions and scores it on `test_size` further ones.
pub fn run_regression(cfg: &ExperimentConfig, problem: &RegressionProblem, seed: u64) -> Result<RegressionReport> {
    run_regression_for(cfg, problem, seed, cfg.regression_epochs)
}

/// The seed shared by every dynamics regression of a run, so that all of them see
/// the same initial conditions.
pub fn dynamics_seed(cfg: &ExperimentConfig) -> u64 {
    run_seed(cfg.seed, &[Coord::Tag("dynamics"), Coord::Int(0)])
}

/// [`run_regression`] with an explicit epoch count.
pub fn run_regression_for(cfg: &ExperimentConfig, problem: &RegressionProblem, seed: u64, epochs: usize) -> Result<RegressionReport> {
    let total = cfg.train_size + cfg.test_size;
    let states = sample_random_initial_conditions(cfg.n_atoms, total, run_seed(seed, &[Coord::Tag("states")]))?;
    let (train_states, test_states) = states.split_at(cfg.train_size);
    let train_data = problem.dataset(train_states)?;
    let test_data = problem.dataset(test_states)?;

    let mut net = ReadoutNet::<f32>::regressor(
        problem.reservoir.feature_len(),
        cfg.hidden,
        problem.target.output_len(),
        run_seed(seed, &[Coord::Tag("init")]),
    )?;
    let mut tc = TrainConfig::new(epochs, run_seed(seed, &[Coord::Tag("shuffle")]));
    tc.batch_size = cfg.regression_batch_size;
    tc.adam.lr = cfg.regression_lr;
    tc.lr_decay = cfg.regression_lr_decay;
    let report = train(&mut net, &train_data, &tc, |_, _| Ok(true))?;

    let train_errors = per_sample_errors(&net, &train_data)?;
    let test_errors = per_sample_errors(&net, &test_data)?;
    let log10_errors: Vec<f64> = test_errors.iter().map(|e| e.log10()).collect();
    let overlays = (0..cfg.overlay_samples.min(cfg.test_size))
        .map(|k| {
            let truth = test_data.targets.row(k).iter().map(|&v| v as f64).collect();
            let prediction = net.forward(test_data.inputs.row(k).as_slice().expect("row"))?;
            Ok(Overlay { sample: k, truth, prediction: prediction.into_iter().map(f64::from).collect() })
        })
        .collect::<Result<_>>()?;
    Ok(RegressionReport {
        seed,
        train_mse: mean(&train_errors),
        test_mse: mean(&test_errors),
        mean_log10_error: mean(&log10_errors),
        log10_errors,
        epoch_losses: report.epoch_losses,
        target_times: problem.target_times.clone(),
        overlays,
    })
}

impl RegressionReport {
    /// `t, sample, atom, re_true, im_true, re_pred, im_pred` for each overlay sample.
    pub fn overlay_csv(&self) -> String {
        let mut out = String::from("sample,t,atom,re_true,im_true,re_pred,im_pred\n");
        for o in &self.overlays {
            let per_time = o.truth.len() / self.target_times.len();
            for (j, &t) in self.target_times.iter().enumerate() {
                for a in 0..per_time / 2 {
                    let i = j * per_time + 2 * a;
                    out.push_str(&format!(
                        "{},{t},{},{},{},{},{}\n",
                        o.sample,
                        a + 1,
                        o.truth[i],
                        o.truth[i + 1],
                        o.prediction[i],
                        o.prediction[i + 1]
                    ));
                }
            }
        }
        out
    }

    /// `sample, log10_mse` for every test sample.
    pub fn error_csv(&self) -> String {
        let mut out = String::from("sample,log10_mse\n");
        for (k, e) in self.log10_errors.iter().enumerate() {
            out.push_str(&format!("{k},{e}\n"));
        }
        out
    }
}
