use crate::error::{Error, Result};
use crate::net::{Gradients, ReadoutNet};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.lr.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0;
        if !ok {
            return Err(Error::InvalidConfig(format!("invalid Adam settings {self:?}")));
        }
        Ok(())
    }
}

/// First and second moment accumulators, shaped like the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<F> {
    pub config: AdamConfig,
    pub step_count: u64,
    pub first_moment: Gradients<F>,
    pub second_moment: Gradients<F>,
}

impl<F: Real> AdamState<F> {
    pub fn new(net: &ReadoutNet<F>, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            step_count: 0,
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
        })
    }
}

/// `p ← p − lr·m̂/(√v̂ + ε)` over one parameter block in a single pass.
fn update_block<F: Real>(p: &mut [F], g: &[F], m: &mut [F], v: &mut [F], c: &StepConstants<F>) {
    for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = c.beta1 * *m + c.one_minus_beta1 * g;
        *v = c.beta2 * *v + c.one_minus_beta2 * g * g;
        let m_hat = *m * c.first_correction;
        let v_hat = *v * c.second_correction;
        *p = *p - c.lr * m_hat / (v_hat.sqrt() + c.eps);
    }
}

struct StepConstants<F> {
    lr: F,
    eps: F,
    beta1: F,
    beta2: F,
    one_minus_beta1: F,
    one_minus_beta2: F,
    first_correction: F,
    second_correction: F,
}

/// One bias-corrected Adam update of every parameter of `net`.
pub fn adam_step<F: Real>(net: &mut ReadoutNet<F>, grads: &Gradients<F>, state: &mut AdamState<F>) -> Result<()> {
    if grads.weights.len() != net.layers().len() || state.first_moment.weights.len() != net.layers().len() {
        return Err(Error::DimensionMismatch { expected: net.layers().len(), got: grads.weights.len() });
    }
    state.step_count += 1;
    let cfg = state.config;
    let t = state.step_count as i32;
    let c = StepConstants {
        lr: F::from_f64(cfg.lr),
        eps: F::from_f64(cfg.eps),
        beta1: F::from_f64(cfg.beta1),
        beta2: F::from_f64(cfg.beta2),
        one_minus_beta1: F::from_f64(1.0 - cfg.beta1),
        one_minus_beta2: F::from_f64(1.0 - cfg.beta2),
        first_correction: F::from_f64(1.0 / (1.0 - cfg.beta1.powi(t))),
        second_correction: F::from_f64(1.0 / (1.0 - cfg.beta2.powi(t))),
    };
    let AdamState { first_moment: m, second_moment: v, .. } = state;
    for (k, layer) in net.layers_mut().iter_mut().enumerate() {
        if grads.weights[k].dim() != layer.weights.dim() || grads.biases[k].dim() != layer.biases.dim() {
            return Err(Error::DimensionMismatch { expected: layer.weights.len(), got: grads.weights[k].len() });
        }
        let blocks = [
            (
                layer.weights.as_slice_mut(),
                grads.weights[k].as_slice(),
                m.weights[k].as_slice_mut(),
                v.weights[k].as_slice_mut(),
            ),
            (
                layer.biases.as_slice_mut(),
                grads.biases[k].as_slice(),
                m.biases[k].as_slice_mut(),
                v.biases[k].as_slice_mut(),
            ),
        ];
        for block in blocks {
            let (Some(p), Some(g), Some(m), Some(v)) = block else {
                return Err(Error::InvalidNetwork("parameters must be contiguous".into()));
            };
            update_block(p, g, m, v, &c);
        }
    }
    Ok(())
}
