use ndarray::{s, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adam::{adam_step, AdamConfig, AdamState};
use crate::error::{Error, Result};
use crate::net::{BatchTargets, Gradients, Head, ReadoutNet, Workspace};
use crate::real::Real;

/// Target of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target<'a, F> {
    Class(usize),
    Values(&'a [F]),
}

/// Indexed supervised samples. Inputs are produced on demand so that large feature
/// maps never need to be materialised for a whole dataset.
pub trait Dataset<F>: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn input_dim(&self) -> usize;

    /// Writes input `index` into `out` (length `input_dim()`).
    fn fill_input(&self, index: usize, out: &mut [F]);

    fn target(&self, index: usize) -> Target<'_, F>;
}

/// Inputs and class labels held in memory.
#[derive(Debug, Clone)]
pub struct ClassificationData<F> {
    pub inputs: Array2<F>,
    pub labels: Vec<usize>,
}

impl<F: Real> Dataset<F> for ClassificationData<F> {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn input_dim(&self) -> usize {
        self.inputs.ncols()
    }

    fn fill_input(&self, index: usize, out: &mut [F]) {
        for (o, &v) in out.iter_mut().zip(self.inputs.row(index)) {
            *o = v;
        }
    }

    fn target(&self, index: usize) -> Target<'_, F> {
        Target::Class(self.labels[index])
    }
}

/// Inputs and real-valued targets held in memory, one sample per row.
#[derive(Debug, Clone)]
pub struct RegressionData<F> {
    pub inputs: Array2<F>,
    pub targets: Array2<F>,
}

impl<F: Real> Dataset<F> for RegressionData<F> {
    fn len(&self) -> usize {
        self.inputs.nrows()
    }

    fn input_dim(&self) -> usize {
        self.inputs.ncols()
    }

    fn fill_input(&self, index: usize, out: &mut [F]) {
        for (o, &v) in out.iter_mut().zip(self.inputs.row(index)) {
            *o = v;
        }
    }

    fn target(&self, index: usize) -> Target<'_, F> {
        Target::Values(self.targets.row(index).to_slice().expect("standard layout"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
    pub adam: AdamConfig,
    /// The learning rate falls geometrically from `adam.lr` to `adam.lr·lr_decay`
    /// over the epochs; 1 keeps it constant.
    pub lr_decay: f64,
}

impl TrainConfig {
    /// Batch size 32 and default Adam settings.
    pub fn new(epochs: usize, seed: u64) -> Self {
        Self { epochs, batch_size: 32, seed, adam: AdamConfig::default(), lr_decay: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::InvalidConfig(format!("lr_decay must lie in (0, 1], got {}", self.lr_decay)));
        }
        self.adam.validate()
    }

    /// Learning rate used during `epoch` (1-based).
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        if self.epochs < 2 {
            return self.adam.lr;
        }
        self.adam.lr * self.lr_decay.powf((epoch - 1) as f64 / (self.epochs - 1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss over the batches of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Mean loss over the dataset before the first update.
    pub initial_loss: f64,
}

/// Reusable batch assembly buffers.
struct Batch<F> {
    inputs: Array2<F>,
    values: Array2<F>,
    classes: Vec<usize>,
}

impl<F: Real> Batch<F> {
    fn new(capacity: usize, input_dim: usize, output_dim: usize) -> Self {
        Self {
            inputs: Array2::zeros((capacity, input_dim)),
            values: Array2::zeros((capacity, output_dim)),
            classes: Vec::with_capacity(capacity),
        }
    }

    fn load<D: Dataset<F> + ?Sized>(&mut self, data: &D, indices: &[usize], head: Head) -> Result<usize> {
        self.classes.clear();
        for (row, &index) in indices.iter().enumerate() {
            let mut input = self.inputs.row_mut(row);
            data.fill_input(index, input.as_slice_mut().expect("standard layout"));
            match (data.target(index), head) {
                (Target::Class(c), Head::Classification) => self.classes.push(c),
                (Target::Values(v), Head::Regression) => {
                    if v.len() != self.values.ncols() {
                        return Err(Error::DimensionMismatch { expected: self.values.ncols(), got: v.len() });
                    }
                    self.values.row_mut(row).as_slice_mut().expect("standard layout").copy_from_slice(v);
                }
                _ => return Err(Error::InvalidConfig(format!("dataset targets do not match the {head:?} head"))),
            }
        }
        Ok(indices.len())
    }

    fn view(&self, rows: usize, head: Head) -> (ArrayView2<'_, F>, BatchTargets<'_, F>) {
        let targets = match head {
            Head::Classification => BatchTargets::Classes(&self.classes[..rows]),
            Head::Regression => BatchTargets::Values(self.values.slice(s![..rows, ..])),
        };
        (self.inputs.slice(s![..rows, ..]), targets)
    }
}

fn check_dataset<F: Real, D: Dataset<F> + ?Sized>(net: &ReadoutNet<F>, data: &D) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidConfig("dataset is empty".into()));
    }
    if data.input_dim() != net.input_dim() {
        return Err(Error::DimensionMismatch { expected: net.input_dim(), got: data.input_dim() });
    }
    Ok(())
}

/// Mean loss of `net` over `data`, evaluated in chunks.
pub fn dataset_loss<F: Real, D: Dataset<F> + ?Sized>(net: &ReadoutNet<F>, data: &D) -> Result<f64> {
    check_dataset(net, data)?;
    let chunk = 256.min(data.len());
    let mut batch = Batch::new(chunk, net.input_dim(), net.output_dim());
    let mut ws = Workspace::new(net, chunk);
    let mut grads = Gradients::zeros_like(net);
    let indices: Vec<usize> = (0..data.len()).collect();
    let mut total = 0.0;
    for part in indices.chunks(chunk) {
        let rows = batch.load(data, part, net.head())?;
        let (x, t) = batch.view(rows, net.head());
        let loss = ws.loss_and_gradients(net, x, t, &mut grads)?;
        total += loss.to_f64().unwrap_or(f64::NAN) * rows as f64;
    }
    Ok(total / data.len() as f64)
}

/// Shuffled mini-batch Adam. `on_epoch(epoch, net)` runs after every epoch (1-based)
/// and may stop training early by returning `false`.
pub fn train<F, D, C>(net: &mut ReadoutNet<F>, data: &D, cfg: &TrainConfig, mut on_epoch: C) -> Result<TrainReport>
where
    F: Real,
    D: Dataset<F> + ?Sized,
    C: FnMut(usize, &ReadoutNet<F>) -> Result<bool>,
{
    cfg.validate()?;
    check_dataset(net, data)?;
    let head = net.head();
    let capacity = cfg.batch_size.min(data.len());
    let mut batch = Batch::new(capacity, net.input_dim(), net.output_dim());
    let mut ws = Workspace::new(net, capacity);
    let mut grads = Gradients::zeros_like(net);
    let mut adam = AdamState::new(net, cfg.adam)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    let initial_loss = dataset_loss(net, data)?;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        adam.config.lr = cfg.learning_rate(epoch);
        let mut total = 0.0;
        let mut batches = 0usize;
        for (b, part) in order.chunks(cfg.batch_size).enumerate() {
            let rows = batch.load(data, part, head)?;
            let (x, t) = batch.view(rows, head);
            let loss = match ws.loss_and_gradients(net, x, t, &mut grads) {
                Ok(loss) => loss.to_f64().unwrap_or(f64::NAN),
                Err(Error::NonFiniteLoss(loss)) => return Err(Error::Divergence { epoch, batch: b, loss }),
                Err(e) => return Err(e),
            };
            adam_step(net, &grads, &mut adam)?;
            total += loss;
            batches += 1;
        }
        epoch_losses.push(total / batches as f64);
        if !on_epoch(epoch, net)? {
            break;
        }
    }
    Ok(TrainReport { epoch_losses, initial_loss })
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax<F: Real>(row: &[F]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Runs `visit(index, output_row)` over the whole dataset in chunks.
fn for_each_output<F, D, V>(net: &ReadoutNet<F>, data: &D, mut visit: V) -> Result<()>
where
    F: Real,
    D: Dataset<F> + ?Sized,
    V: FnMut(usize, &[F], Target<'_, F>),
{
    check_dataset(net, data)?;
    let chunk = 256.min(data.len());
    let mut inputs = Array2::zeros((chunk, net.input_dim()));
    let mut ws = Workspace::new(net, chunk);
    let indices: Vec<usize> = (0..data.len()).collect();
    for part in indices.chunks(chunk) {
        for (row, &index) in part.iter().enumerate() {
            data.fill_input(index, inputs.row_mut(row).as_slice_mut().expect("standard layout"));
        }
        ws.forward(net, inputs.slice(s![..part.len(), ..]))?;
        for (out, &index) in ws.output().axis_iter(Axis(0)).zip(part) {
            visit(index, out.as_slice().expect("standard layout"), data.target(index));
        }
    }
    Ok(())
}

/// Fraction of samples whose argmax output equals the label.
pub fn evaluate_classifier<F: Real, D: Dataset<F> + ?Sized>(net: &ReadoutNet<F>, data: &D) -> Result<f64> {
    if net.head() != Head::Classification {
        return Err(Error::InvalidConfig("accuracy needs a classification head".into()));
    }
    let mut correct = 0usize;
    let mut mismatch = false;
    for_each_output(net, data, |_, out, target| match target {
        Target::Class(c) => correct += usize::from(argmax(out) == c),
        Target::Values(_) => mismatch = true,
    })?;
    if mismatch {
        return Err(Error::InvalidConfig("classification needs class targets".into()));
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Per-sample mean squared error over all outputs.
pub fn per_sample_errors<F: Real, D: Dataset<F> + ?Sized>(net: &ReadoutNet<F>, data: &D) -> Result<Vec<f64>> {
    if net.head() != Head::Regression {
        return Err(Error::InvalidConfig("squared errors need a regression head".into()));
    }
    let mut errors = vec![f64::NAN; data.len()];
    let mut mismatch = false;
    for_each_output(net, data, |index, out, target| match target {
        Target::Values(v) if v.len() == out.len() => {
            let sum: f64 = out
                .iter()
                .zip(v)
                .map(|(&a, &b)| {
                    let e = a.to_f64().unwrap_or(f64::NAN) - b.to_f64().unwrap_or(f64::NAN);
                    e * e
                })
                .sum();
            errors[index] = sum / out.len() as f64;
        }
        _ => mismatch = true,
    })?;
    if mismatch {
        return Err(Error::InvalidConfig("regression needs value targets of the output width".into()));
    }
    Ok(errors)
}

/// Mean over samples of the per-sample mean squared error.
pub fn evaluate_regressor<F: Real, D: Dataset<F> + ?Sized>(net: &ReadoutNet<F>, data: &D) -> Result<f64> {
    let errors = per_sample_errors(net, data)?;
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}
