use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::Float;

/// Floating-point element type of a network.
pub trait Real: Float + LinalgScalar + ScalarOperand + Sum + Send + Sync + Debug + Display + 'static {
    /// Bytes per value in checkpoints.
    const WIDTH: u8;

    fn from_f64(x: f64) -> Self;

    fn write_le(self, out: &mut Vec<u8>);

    /// `bytes.len() == WIDTH`.
    fn read_le(bytes: &[u8]) -> Self;
}

impl Real for f32 {
    const WIDTH: u8 = 4;

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4-byte slice"))
    }
}

impl Real for f64 {
    const WIDTH: u8 = 8;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8-byte slice"))
    }
}
