//! Versioned little-endian binary checkpoints of a network and, optionally, its
//! optimizer state. The layout is documented in `docs/checkpoint-format.md`.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use crate::adam::{AdamConfig, AdamState};
use crate::error::{Error, Result};
use crate::layer::{Activation, DenseLayer};
use crate::net::{Gradients, Head, ReadoutNet};
use crate::real::Real;

pub const MAGIC: &[u8; 8] = b"QPRCNET\0";
pub const VERSION: u32 = 1;

fn head_code(head: Head) -> u8 {
    match head {
        Head::Classification => 0,
        Head::Regression => 1,
    }
}

fn put_values<F: Real>(out: &mut Vec<u8>, values: impl Iterator<Item = F>) {
    for v in values {
        v.write_le(out);
    }
}

fn put_blocks<F: Real>(out: &mut Vec<u8>, g: &Gradients<F>) {
    for (w, b) in g.weights.iter().zip(&g.biases) {
        put_values(out, w.iter().copied());
        put_values(out, b.iter().copied());
    }
}

/// Serialises `net` and `optimizer` to bytes.
pub fn to_bytes<F: Real>(net: &ReadoutNet<F>, optimizer: Option<&AdamState<F>>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + net.parameter_count() * F::WIDTH as usize * 3);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(F::WIDTH);
    out.push(head_code(net.head()));
    out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    for layer in net.layers() {
        out.push(layer.activation.code());
        out.extend_from_slice(&(layer.out_dim() as u32).to_le_bytes());
        out.extend_from_slice(&(layer.in_dim() as u32).to_le_bytes());
    }
    for layer in net.layers() {
        put_values(&mut out, layer.weights.iter().copied());
        put_values(&mut out, layer.biases.iter().copied());
    }
    match optimizer {
        None => out.push(0),
        Some(state) => {
            out.push(1);
            out.extend_from_slice(&state.step_count.to_le_bytes());
            for v in [state.config.lr, state.config.beta1, state.config.beta2, state.config.eps] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            put_blocks(&mut out, &state.first_moment);
            put_blocks(&mut out, &state.second_moment);
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.at)))?;
        let slice = &self.bytes[self.at..end];
        self.at = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn values<F: Real>(&mut self, n: usize) -> Result<Vec<F>> {
        let width = F::WIDTH as usize;
        let raw = self.take(n.checked_mul(width).ok_or_else(|| Error::Checkpoint("size overflow".into()))?)?;
        Ok(raw.chunks_exact(width).map(F::read_le).collect())
    }

    fn blocks<F: Real>(&mut self, shapes: &[(usize, usize)]) -> Result<Gradients<F>> {
        let mut g = Gradients { weights: Vec::new(), biases: Vec::new() };
        for &(out, inp) in shapes {
            g.weights.push(Array2::from_shape_vec((out, inp), self.values(out * inp)?).expect("sized"));
            g.biases.push(Array1::from_vec(self.values(out)?));
        }
        Ok(g)
    }
}

/// Parses bytes produced by [`to_bytes`] with the same element type.
pub fn from_bytes<F: Real>(bytes: &[u8]) -> Result<(ReadoutNet<F>, Option<AdamState<F>>)> {
    let mut c = Cursor { bytes, at: 0 };
    if c.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let width = c.u8()?;
    if width != F::WIDTH {
        return Err(Error::Checkpoint(format!("stored {width}-byte values, expected {}", F::WIDTH)));
    }
    let head = match c.u8()? {
        0 => Head::Classification,
        1 => Head::Regression,
        other => return Err(Error::Checkpoint(format!("unknown head {other}"))),
    };
    let depth = c.u32()? as usize;
    let mut specs = Vec::with_capacity(depth.min(1024));
    for _ in 0..depth {
        let activation = Activation::from_code(c.u8()?).ok_or_else(|| Error::Checkpoint("unknown activation".into()))?;
        let out = c.u32()? as usize;
        let inp = c.u32()? as usize;
        specs.push((activation, out, inp));
    }
    let mut layers = Vec::with_capacity(depth);
    for &(activation, out, inp) in &specs {
        let weights = Array2::from_shape_vec((out, inp), c.values(out * inp)?).expect("sized");
        let biases = Array1::from_vec(c.values(out)?);
        layers.push(DenseLayer::new(weights, biases, activation)?);
    }
    let net = ReadoutNet::new(layers, head)?;
    let optimizer = match c.u8()? {
        0 => None,
        1 => {
            let step_count = c.u64()?;
            let config = AdamConfig { lr: c.f64()?, beta1: c.f64()?, beta2: c.f64()?, eps: c.f64()? };
            let shapes: Vec<(usize, usize)> = specs.iter().map(|&(_, o, i)| (o, i)).collect();
            let first_moment = c.blocks(&shapes)?;
            let second_moment = c.blocks(&shapes)?;
            Some(AdamState { config, step_count, first_moment, second_moment })
        }
        other => return Err(Error::Checkpoint(format!("unknown optimizer flag {other}"))),
    };
    if c.at != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - c.at)));
    }
    Ok((net, optimizer))
}

pub fn save<F: Real, W: Write>(net: &ReadoutNet<F>, optimizer: Option<&AdamState<F>>, mut out: W) -> Result<()> {
    out.write_all(&to_bytes(net, optimizer))?;
    Ok(())
}

pub fn load<F: Real, R: Read>(mut input: R) -> Result<(ReadoutNet<F>, Option<AdamState<F>>)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adam::adam_step;
    use ndarray::Array2;

    #[test]
    fn round_trip_with_optimizer_state() {
        let mut net = ReadoutNet::<f32>::regressor(6, 5, 4, 1).unwrap();
        let mut state = AdamState::new(&net, AdamConfig::default()).unwrap();
        let x = Array2::from_shape_fn((3, 6), |(r, c)| (r as f32 - c as f32) * 0.1);
        let y = Array2::from_elem((3, 4), 0.25f32);
        let (_, g) = net.loss_and_gradients(x.view(), crate::net::BatchTargets::Values(y.view())).unwrap();
        adam_step(&mut net, &g, &mut state).unwrap();

        let bytes = to_bytes(&net, Some(&state));
        let (net2, state2) = from_bytes::<f32>(&bytes).unwrap();
        assert_eq!(net2, net);
        assert_eq!(state2.unwrap(), state);
        assert_eq!(to_bytes(&net2, Some(&state)), bytes);

        let file = tempfile::NamedTempFile::new().unwrap();
        save(&net, None, file.reopen().unwrap()).unwrap();
        let (loaded, none) = load::<f32, _>(file.reopen().unwrap()).unwrap();
        assert_eq!(loaded, net);
        assert!(none.is_none());
    }

    #[test]
    fn malformed_checkpoints_are_rejected() {
        let net = ReadoutNet::<f64>::classifier(3, 2, 2, 0).unwrap();
        let bytes = to_bytes(&net, None);
        assert!(from_bytes::<f32>(&bytes).is_err());
        assert!(from_bytes::<f64>(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(from_bytes::<f64>(&extra).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(from_bytes::<f64>(&bad).is_err());
        let mut future = bytes;
        future[8] = 2;
        assert!(from_bytes::<f64>(&future).is_err());
    }
}
