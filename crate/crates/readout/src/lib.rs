//! Trainable readout of a physical reservoir computer: dense layers with tanh
//! hidden units, a softmax or linear output, and Adam.
//!
//! The network is generic over [`Real`] (`f32` or `f64`). Training consumes inputs
//! through the [`Dataset`] trait, so feature vectors can be generated per batch
//! instead of stored.

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod layer;
pub mod net;
pub mod real;
pub mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use error::{Error, Result};
pub use layer::{Activation, DenseLayer};
pub use net::{BatchTargets, Gradients, Head, ReadoutNet, Workspace};
pub use real::Real;
pub use train::{
    argmax, dataset_loss, evaluate_classifier, evaluate_regressor, per_sample_errors, train, ClassificationData,
    Dataset, RegressionData, Target, TrainConfig, TrainReport,
};
