//! Desk-scale reproductions of the reservoir experiments: MNIST size and epoch
//! sweeps, dynamics regression onto band-edge targets and spectral-width heatmaps.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod heatmap;
pub mod mnist;
pub mod run;
pub mod seed;
pub mod simulate;
pub mod stats;

pub use config::{ExperimentConfig, TargetKind, Task};
pub use error::{Error, Result};
