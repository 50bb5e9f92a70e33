//! Single-excitation dynamics of N two-level atoms coupled to a structured
//! electromagnetic environment, used as a physical reservoir computer.
//!
//! * [`reservoir`]: closed-form evolution in a lossy Lorentzian cavity.
//! * [`kernel`], [`pseudomode`], [`pbg`], [`laplace`]: memory kernels, the numerical
//!   solvers and the Laplace-domain oracle.
//! * [`encoding`]: maps from images and quantum states to initial conditions and from
//!   trajectories to real feature vectors.
//!
//! Times are in units of `1/ω₀`.

pub mod amplitude;
pub mod encoding;
pub mod error;
pub mod kernel;
pub mod laplace;
pub mod ode;
pub mod pbg;
pub mod pseudomode;
pub mod reservoir;
pub mod solver;

pub use amplitude::{AmplitudeVector, Trajectory};
pub use encoding::{
    encode_image, encode_quantum_state, features_from_trajectory, sample_random_initial_conditions,
    trajectory_from_features, FeatureVector, ReservoirFeatureMap,
};
pub use error::{Error, Result};
pub use kernel::{Kernel, LorentzianKernel, PbgKernel};
pub use laplace::{laplace_amplitude_oracle, laplace_collective_oracle};
pub use pbg::solve_pbg_dynamics;
pub use pseudomode::solve_volterra_ode;
pub use reservoir::{evolve_amplitudes, sample_trajectory, ReservoirParams};
pub use solver::SolverConfig;
