use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layer::{Activation, DenseLayer};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    /// Softmax output with mean cross-entropy loss.
    Classification,
    /// Identity output with loss `mean_b mean_k (ŷ_bk − y_bk)²`.
    Regression,
}

/// A stack of dense layers. The only trainable part of the reservoir computer.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutNet<F> {
    layers: Vec<DenseLayer<F>>,
    head: Head,
}

/// Targets for a batch of inputs, one per row.
#[derive(Debug, Clone, Copy)]
pub enum BatchTargets<'a, F> {
    Classes(&'a [usize]),
    Values(ArrayView2<'a, F>),
}

impl<F> BatchTargets<'_, F> {
    fn len(&self) -> usize {
        match self {
            BatchTargets::Classes(c) => c.len(),
            BatchTargets::Values(v) => v.nrows(),
        }
    }
}

/// Parameter-shaped gradient (or moment) buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub weights: Vec<Array2<F>>,
    pub biases: Vec<Array1<F>>,
}

impl<F: Real> Gradients<F> {
    pub fn zeros_like(net: &ReadoutNet<F>) -> Self {
        Self {
            weights: net.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            biases: net.layers.iter().map(|l| Array1::zeros(l.biases.raw_dim())).collect(),
        }
    }
}

impl<F: Real> ReadoutNet<F> {
    pub fn new(layers: Vec<DenseLayer<F>>, head: Head) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::InvalidNetwork("a network needs at least one layer".into()));
        };
        let expected_output = match head {
            Head::Classification => Activation::Softmax,
            Head::Regression => Activation::Identity,
        };
        if last.activation != expected_output {
            return Err(Error::InvalidNetwork(format!("{head:?} head must end in {expected_output:?}")));
        }
        for (k, layer) in layers.iter().enumerate() {
            layer.validate()?;
            if k + 1 < layers.len() && layer.activation == Activation::Softmax {
                return Err(Error::InvalidNetwork("softmax is only allowed on the output layer".into()));
            }
            if k > 0 && layers[k - 1].out_dim() != layer.in_dim() {
                return Err(Error::DimensionMismatch { expected: layers[k - 1].out_dim(), got: layer.in_dim() });
            }
        }
        Ok(Self { layers, head })
    }

    /// `in → hidden (tanh) → classes (softmax)`, Glorot-initialised from `seed`.
    pub fn classifier(in_dim: usize, hidden: usize, classes: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(
            vec![
                DenseLayer::glorot(in_dim, hidden, Activation::Tanh, &mut rng),
                DenseLayer::glorot(hidden, classes, Activation::Softmax, &mut rng),
            ],
            Head::Classification,
        )
    }

    /// `in → hidden (tanh) → hidden (tanh) → out (identity)`, Glorot-initialised from `seed`.
    pub fn regressor(in_dim: usize, hidden: usize, out_dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(
            vec![
                DenseLayer::glorot(in_dim, hidden, Activation::Tanh, &mut rng),
                DenseLayer::glorot(hidden, hidden, Activation::Tanh, &mut rng),
                DenseLayer::glorot(hidden, out_dim, Activation::Identity, &mut rng),
            ],
            Head::Regression,
        )
    }

    pub fn layers(&self) -> &[DenseLayer<F>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer<F>] {
        &mut self.layers
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Output for a single input vector.
    pub fn forward(&self, x: &[F]) -> Result<Vec<F>> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("contiguous row");
        Ok(self.forward_batch(view)?.into_raw_vec_and_offset().0)
    }

    /// Outputs for each row of `x`.
    pub fn forward_batch(&self, x: ArrayView2<F>) -> Result<Array2<F>> {
        let mut ws = Workspace::new(self, x.nrows());
        ws.forward(self, x)?;
        Ok(ws.activations.pop().expect("at least one layer"))
    }

    /// Mean batch loss and its exact gradient.
    pub fn loss_and_gradients(&self, x: ArrayView2<F>, targets: BatchTargets<F>) -> Result<(F, Gradients<F>)> {
        let mut ws = Workspace::new(self, x.nrows());
        let mut grads = Gradients::zeros_like(self);
        let loss = ws.loss_and_gradients(self, x, targets, &mut grads)?;
        Ok((loss, grads))
    }
}

/// Reusable activation and delta buffers for batches of up to `capacity` rows.
#[derive(Debug)]
pub struct Workspace<F> {
    capacity: usize,
    activations: Vec<Array2<F>>,
    deltas: Vec<Array2<F>>,
    rows: usize,
}

impl<F: Real> Workspace<F> {
    pub fn new(net: &ReadoutNet<F>, capacity: usize) -> Self {
        let activations = net.layers.iter().map(|l| Array2::zeros((capacity, l.out_dim()))).collect();
        let deltas = net.layers.iter().map(|l| Array2::zeros((capacity, l.out_dim()))).collect();
        Self { capacity, activations, deltas, rows: 0 }
    }

    /// Output rows of the most recent forward pass.
    pub fn output(&self) -> ArrayView2<'_, F> {
        self.activations.last().expect("at least one layer").slice(s![..self.rows, ..])
    }

    pub fn forward(&mut self, net: &ReadoutNet<F>, x: ArrayView2<F>) -> Result<()> {
        if x.ncols() != net.input_dim() {
            return Err(Error::DimensionMismatch { expected: net.input_dim(), got: x.ncols() });
        }
        if x.nrows() > self.capacity {
            return Err(Error::DimensionMismatch { expected: self.capacity, got: x.nrows() });
        }
        let b = x.nrows();
        self.rows = b;
        for (k, layer) in net.layers.iter().enumerate() {
            let (done, rest) = self.activations.split_at_mut(k);
            let mut z = rest[0].slice_mut(s![..b, ..]);
            z.assign(&layer.biases.broadcast((b, layer.out_dim())).expect("bias broadcast"));
            let input = if k == 0 { x } else { done[k - 1].slice(s![..b, ..]) };
            general_mat_mul(F::one(), &input, &layer.weights.t(), F::one(), &mut z);
            layer.activation.apply(z);
        }
        Ok(())
    }

    /// Forward and backward pass; overwrites `grads` and returns the mean loss.
    /// The gradient with respect to the input is never formed.
    pub fn loss_and_gradients(
        &mut self,
        net: &ReadoutNet<F>,
        x: ArrayView2<F>,
        targets: BatchTargets<F>,
        grads: &mut Gradients<F>,
    ) -> Result<F> {
        if targets.len() != x.nrows() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), got: targets.len() });
        }
        if x.nrows() == 0 {
            return Err(Error::InvalidConfig("empty batch".into()));
        }
        self.forward(net, x)?;
        let b = x.nrows();
        let depth = net.layers.len();
        let out_dim = net.output_dim();
        let inv_b = F::one() / F::from_f64(b as f64);

        let output = self.activations[depth - 1].slice(s![..b, ..]);
        let mut delta = self.deltas[depth - 1].slice_mut(s![..b, ..]);
        let mut loss = F::zero();
        match (net.head, targets) {
            (Head::Classification, BatchTargets::Classes(classes)) => {
                delta.assign(&output);
                for (r, &class) in classes.iter().enumerate() {
                    if class >= out_dim {
                        return Err(Error::DimensionMismatch { expected: out_dim, got: class + 1 });
                    }
                    let p = output[[r, class]].max(F::min_positive_value());
                    loss = loss - p.ln();
                    delta[[r, class]] = delta[[r, class]] - F::one();
                }
                delta.mapv_inplace(|v| v * inv_b);
            }
            (Head::Regression, BatchTargets::Values(values)) => {
                if values.ncols() != out_dim {
                    return Err(Error::DimensionMismatch { expected: out_dim, got: values.ncols() });
                }
                let scale = F::from_f64(2.0) * inv_b / F::from_f64(out_dim as f64);
                ndarray::Zip::from(&mut delta).and(&output).and(&values).for_each(|d, &y_hat, &y| {
                    let e = y_hat - y;
                    loss = loss + e * e;
                    *d = scale * e;
                });
                loss = loss / F::from_f64(out_dim as f64);
            }
            (head, _) => {
                return Err(Error::InvalidConfig(format!("targets do not match the {head:?} head")));
            }
        }
        loss = loss * inv_b;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(loss.to_f64().unwrap_or(f64::NAN)));
        }

        for k in (0..depth).rev() {
            let input = if k == 0 { x } else { self.activations[k - 1].slice(s![..b, ..]) };
            let delta = self.deltas[k].slice(s![..b, ..]);
            general_mat_mul(F::one(), &delta.t(), &input, F::zero(), &mut grads.weights[k]);
            grads.biases[k].assign(&delta.sum_axis(Axis(0)));
            if k > 0 {
                let (below, here) = self.deltas.split_at_mut(k);
                let here = here[0].slice(s![..b, ..]);
                let mut back = below[k - 1].slice_mut(s![..b, ..]);
                general_mat_mul(F::one(), &here, &net.layers[k].weights, F::zero(), &mut back);
                let a = self.activations[k - 1].slice(s![..b, ..]);
                match net.layers[k - 1].activation {
                    Activation::Tanh => {
                        ndarray::Zip::from(&mut back).and(&a).for_each(|d, &a| *d = *d * (F::one() - a * a));
                    }
                    Activation::Identity => {}
                    Activation::Softmax => unreachable!("softmax is confined to the output layer"),
                }
            }
        }
        Ok(loss)
    }
}
