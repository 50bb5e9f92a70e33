//! Population dynamics of an ensemble started with the first atom excited.

use num_complex::Complex64;
use qprc_core::{evolve_amplitudes, solve_pbg_dynamics, AmplitudeVector, PbgKernel, ReservoirParams, SolverConfig, Trajectory};

use crate::config::{ExperimentConfig, TargetKind};
use crate::error::{Error, Result};

/// First atom excited, the rest in the ground state.
pub fn first_atom_excited(n_atoms: usize) -> Result<AmplitudeVector> {
    let mut c = vec![Complex64::new(0.0, 0.0); n_atoms];
    c[0] = Complex64::new(1.0, 0.0);
    Ok(AmplitudeVector::new(c)?)
}

/// Amplitudes at `t_k = k·sim_t_max/sim_points`, `k = 0..=sim_points`, in a Lorentzian
/// cavity (`lam`, `gamma`, `dipole`) or at a band edge (`beta`, `delta`, `dipole`).
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Trajectory> {
    let times: Vec<f64> = (0..=cfg.sim_points).map(|k| k as f64 * cfg.sim_t_max / cfg.sim_points as f64).collect();
    let c0 = first_atom_excited(cfg.sim_atoms)?;
    match cfg.system {
        TargetKind::Lorentzian => {
            let params = ReservoirParams::new(cfg.sim_atoms, cfg.lam, cfg.gamma, cfg.dipole)?;
            let samples = times.iter().map(|&t| evolve_amplitudes(&c0, &params, t)).collect::<qprc_core::Result<_>>()?;
            Ok(Trajectory::new(times, samples)?)
        }
        TargetKind::Pbg => {
            let kernel = PbgKernel::new(cfg.beta, cfg.delta)?;
            let solver = SolverConfig::new(cfg.sim_dt, cfg.sim_t_max)?;
            let traj = solve_pbg_dynamics(&c0, &kernel, cfg.dipole, &solver)?;
            traj.resample(&times).map_err(|_| {
                Error::Config(format!("sim_dt = {} must divide sim_t_max/sim_points", cfg.sim_dt))
            })
        }
        TargetKind::Identity => Err(Error::Config("system must be `lorentzian` or `pbg`".into())),
    }
}
