use ndarray::{Array1, Array2, ArrayViewMut2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
    /// Row-wise softmax; only valid on the output layer of a classifier.
    Softmax,
}

impl Activation {
    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Identity => 1,
            Activation::Softmax => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Identity),
            2 => Some(Activation::Softmax),
            _ => None,
        }
    }

    /// Applies the activation in place to each row of pre-activations.
    pub(crate) fn apply<F: Real>(self, mut z: ArrayViewMut2<F>) {
        match self {
            Activation::Tanh => z.mapv_inplace(F::tanh),
            Activation::Identity => {}
            Activation::Softmax => {
                for mut row in z.axis_iter_mut(Axis(0)) {
                    let max = row.iter().copied().fold(F::neg_infinity(), F::max);
                    row.mapv_inplace(|v| (v - max).exp());
                    let total: F = row.iter().copied().sum();
                    row.mapv_inplace(|v| v / total);
                }
            }
        }
    }
}

/// Affine map `x ↦ act(W x + b)` with `W` of shape `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<F> {
    pub weights: Array2<F>,
    pub biases: Array1<F>,
    pub activation: Activation,
}

impl<F: Real> DenseLayer<F> {
    pub fn new(weights: Array2<F>, biases: Array1<F>, activation: Activation) -> Result<Self> {
        let layer = Self { weights, biases, activation };
        layer.validate()?;
        Ok(layer)
    }

    /// Weights uniform in `±√(6/(in + out))`, zero biases.
    pub fn glorot<R: Rng>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((out_dim, in_dim), || F::from_f64(rng.random_range(-limit..limit)));
        Self { weights, biases: Array1::zeros(out_dim), activation }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.biases.len() != self.out_dim() {
            return Err(Error::DimensionMismatch { expected: self.out_dim(), got: self.biases.len() });
        }
        if self.in_dim() == 0 || self.out_dim() == 0 {
            return Err(Error::InvalidNetwork("layers need positive dimensions".into()));
        }
        if self.weights.iter().chain(self.biases.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite parameter".into()));
        }
        Ok(())
    }
}
