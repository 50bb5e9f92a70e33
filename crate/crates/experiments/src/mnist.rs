//! MNIST size and epoch sweeps: a dense readout on reservoir features against the
//! same readout on raw pixels.

use std::collections::BTreeSet;

use qprc_core::encoding::baseline_features;
use qprc_core::{encode_image, AmplitudeVector, ReservoirFeatureMap, ReservoirParams};
use qprc_mnist::{Image, LabeledImageSet, PIXELS};
use qprc_readout::{evaluate_classifier, train, Dataset, ReadoutNet, Target, TrainConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::seed::{run_seed, Coord};
use crate::stats::{Curve, SweepPoint, SweepResult};

pub const CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Qprc,
    Baseline,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::Qprc => "qprc",
            Model::Baseline => "baseline",
        }
    }
}

/// Images encoded as reservoir initial conditions, with labels.
#[derive(Debug, Clone)]
pub struct EncodedSet {
    pub states: Vec<AmplitudeVector>,
    pub images: Vec<Image>,
    pub labels: Vec<usize>,
}

impl EncodedSet {
    pub fn new(set: &LabeledImageSet) -> Result<Self> {
        let states = set.images().iter().map(|img| encode_image(img)).collect::<qprc_core::Result<_>>()?;
        Ok(Self {
            states,
            images: set.images().to_vec(),
            labels: set.labels().iter().map(|&l| l as usize).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Reservoir features computed on demand for each requested sample.
pub struct ReservoirView<'a> {
    pub set: &'a EncodedSet,
    pub map: &'a ReservoirFeatureMap,
}

impl Dataset<f32> for ReservoirView<'_> {
    fn len(&self) -> usize {
        self.set.len()
    }

    fn input_dim(&self) -> usize {
        self.map.feature_len()
    }

    fn fill_input(&self, index: usize, out: &mut [f32]) {
        self.map
            .write_features_as(&self.set.states[index], out, |v| v as f32)
            .expect("encoded states match the feature map");
    }

    fn target(&self, index: usize) -> Target<'_, f32> {
        Target::Class(self.set.labels[index])
    }
}

/// Pixels scaled to `[0, 1]`.
pub struct PixelView<'a> {
    pub set: &'a EncodedSet,
}

impl Dataset<f32> for PixelView<'_> {
    fn len(&self) -> usize {
        self.set.len()
    }

    fn input_dim(&self) -> usize {
        PIXELS
    }

    fn fill_input(&self, index: usize, out: &mut [f32]) {
        let mut scaled = [0.0; PIXELS];
        baseline_features(&self.set.images[index], &mut scaled);
        for (o, v) in out.iter_mut().zip(scaled) {
            *o = v as f32;
        }
    }

    fn target(&self, index: usize) -> Target<'_, f32> {
        Target::Class(self.set.labels[index])
    }
}

/// Which runs to train and at which epochs to score them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// Training size and the epochs at which that size is scored.
    pub points: Vec<(usize, BTreeSet<usize>)>,
    pub repetitions: usize,
}

impl SweepPlan {
    pub fn size_sweep(cfg: &ExperimentConfig) -> Self {
        let points = cfg.sizes.iter().map(|&s| (s, BTreeSet::from([cfg.epochs]))).collect();
        Self { points, repetitions: cfg.repetitions }
    }

    pub fn epoch_sweep(cfg: &ExperimentConfig) -> Self {
        Self {
            points: vec![(cfg.epoch_sweep_size, cfg.epoch_list.iter().copied().collect())],
            repetitions: cfg.repetitions,
        }
    }

    /// Both sweeps from one set of runs: the epoch-sweep size is scored at every
    /// listed epoch in addition to the final one.
    pub fn combined(cfg: &ExperimentConfig) -> Self {
        let mut plan = Self::size_sweep(cfg);
        let extra: BTreeSet<usize> = cfg.epoch_list.iter().copied().collect();
        match plan.points.iter_mut().find(|(s, _)| *s == cfg.epoch_sweep_size) {
            Some((_, epochs)) => epochs.extend(extra),
            None => plan.points.push((cfg.epoch_sweep_size, extra)),
        }
        plan
    }
}

/// Test accuracy of one model after each scored epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub model: Model,
    pub size: usize,
    pub repetition: usize,
    pub seed: u64,
    pub accuracy: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MnistSweep {
    pub runs: Vec<RunRecord>,
}

impl MnistSweep {
    fn accuracies(&self, model: Model, size: usize, epoch: usize) -> Vec<f64> {
        let mut runs: Vec<&RunRecord> = self.runs.iter().filter(|r| r.model == model && r.size == size).collect();
        runs.sort_by_key(|r| r.repetition);
        runs.iter()
            .filter_map(|r| r.accuracy.iter().find(|(e, _)| *e == epoch).map(|&(_, a)| a))
            .collect()
    }

    /// Accuracy against training size at `epoch`.
    pub fn by_size(&self, sizes: &[usize], epoch: usize) -> SweepResult {
        self.result("train_size", sizes.iter().map(|&s| (s as f64, s, epoch)))
    }

    /// Accuracy against epoch count at `size`.
    pub fn by_epoch(&self, size: usize, epochs: &[usize]) -> SweepResult {
        self.result("epochs", epochs.iter().map(|&e| (e as f64, size, e)))
    }

    fn result(&self, axis: &str, coords: impl Iterator<Item = (f64, usize, usize)> + Clone) -> SweepResult {
        let curves = [Model::Qprc, Model::Baseline]
            .into_iter()
            .map(|m| Curve {
                label: m.label().into(),
                points: coords.clone().map(|(x, s, e)| SweepPoint::new(x, self.accuracies(m, s, e))).collect(),
            })
            .collect();
        SweepResult { axis: axis.into(), metric: "accuracy".into(), curves }
    }
}

/// Seed of repetition `rep` at training size `size`; shared by both models so that
/// they see the same split and batch order.
pub fn mnist_seed(base: u64, size: usize, rep: usize) -> u64 {
    run_seed(base, &[Coord::Tag("mnist"), Coord::Int(size as u64), Coord::Int(rep as u64)])
}

/// The reservoir feature map for MNIST inputs (392 atoms).
pub fn mnist_feature_map(cfg: &ExperimentConfig) -> Result<ReservoirFeatureMap> {
    let params = ReservoirParams::new(PIXELS / 2, cfg.lam, cfg.gamma, cfg.dipole)?;
    Ok(ReservoirFeatureMap::new(&params, cfg.n_steps, cfg.mnist_t_max)?)
}

/// Trains every run of `plan`. `progress` receives one line per finished run.
pub fn run_mnist_sweep(
    cfg: &ExperimentConfig,
    train_set: &LabeledImageSet,
    test_set: &LabeledImageSet,
    plan: &SweepPlan,
    progress: &(dyn Fn(&str) + Sync),
) -> Result<MnistSweep> {
    if plan.points.is_empty() || plan.repetitions == 0 || plan.points.iter().any(|(s, e)| *s == 0 || e.is_empty()) {
        return Err(Error::Config("the sweep plan needs sizes, epochs and repetitions".into()));
    }
    let test_set = match cfg.test_limit {
        0 => test_set.clone(),
        n => LabeledImageSet::new("test", test_set.images()[..n.min(test_set.len())].to_vec(), test_set.labels()[..n.min(test_set.len())].to_vec())?,
    };
    let test = EncodedSet::new(&test_set)?;
    let map = mnist_feature_map(cfg)?;

    let mut jobs = Vec::new();
    for (size, epochs) in &plan.points {
        for rep in 0..plan.repetitions {
            for model in [Model::Qprc, Model::Baseline] {
                jobs.push((*size, rep, model, epochs));
            }
        }
    }
    let runs = jobs
        .par_iter()
        .map(|&(size, rep, model, epochs)| {
            let seed = mnist_seed(cfg.seed, size, rep);
            let split = EncodedSet::new(&train_set.take_split(size, run_seed(seed, &[Coord::Tag("split")]))?)?;
            let record = match model {
                Model::Qprc => {
                    let train_view = ReservoirView { set: &split, map: &map };
                    let test_view = ReservoirView { set: &test, map: &map };
                    train_and_score(cfg, &train_view, &test_view, epochs, seed)?
                }
                Model::Baseline => train_and_score(cfg, &PixelView { set: &split }, &PixelView { set: &test }, epochs, seed)?,
            };
            let last = record.last().map_or(f64::NAN, |&(_, a)| a);
            progress(&format!("{} size {size} rep {rep}: accuracy {last:.4}", model.label()));
            Ok(RunRecord { model, size, repetition: rep, seed, accuracy: record })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MnistSweep { runs })
}

fn train_and_score<D: Dataset<f32>>(
    cfg: &ExperimentConfig,
    train_data: &D,
    test_data: &D,
    epochs: &BTreeSet<usize>,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let last = *epochs.iter().next_back().expect("non-empty epoch set");
    let mut net = ReadoutNet::<f32>::classifier(train_data.input_dim(), cfg.hidden, CLASSES, run_seed(seed, &[Coord::Tag("init")]))?;
    let mut tc = TrainConfig::new(last, run_seed(seed, &[Coord::Tag("shuffle")]));
    tc.batch_size = cfg.batch_size;
    tc.adam.lr = cfg.lr;
    let mut scores = Vec::with_capacity(epochs.len());
    train(&mut net, train_data, &tc, |epoch, net| {
        if epochs.contains(&epoch) {
            scores.push((epoch, evaluate_classifier(net, test_data)?));
        }
        Ok(true)
    })?;
    Ok(scores)
}

/// Smallest swept size from which the reservoir mean stays at or above the
/// baseline mean, if any.
pub fn crossover(size_sweep: &SweepResult) -> Option<f64> {
    let q = size_sweep.curve("qprc")?;
    let b = size_sweep.curve("baseline")?;
    let ahead: Vec<bool> = q.points.iter().zip(&b.points).map(|(q, b)| q.mean >= b.mean).collect();
    let first = (0..ahead.len()).find(|&k| ahead[k..].iter().all(|&a| a))?;
    Some(q.points[first].x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qprc_mnist::Image;

    /// Ten separable "digits": class `d` lights the pixel band `d`.
    fn toy_set(n: usize, offset: usize) -> LabeledImageSet {
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for k in 0..n {
            let d = (k + offset) % 10;
            let mut img: Image = [0; PIXELS];
            for p in img.iter_mut().skip(d * 78).take(78) {
                *p = 100 + (k % 7) as u8 * 20;
            }
            images.push(img);
            labels.push(d as u8);
        }
        LabeledImageSet::new("toy", images, labels).unwrap()
    }

    fn quick() -> ExperimentConfig {
        ExperimentConfig { sizes: vec![40, 60], epochs: 3, epoch_list: vec![1, 3], epoch_sweep_size: 60, hidden: 8, repetitions: 2, n_steps: 2, ..ExperimentConfig::default() }
    }

    #[test]
    fn combined_plan_scores_the_epoch_size_at_every_listed_epoch() {
        let plan = SweepPlan::combined(&quick());
        assert_eq!(plan.points, vec![(40, BTreeSet::from([3])), (60, BTreeSet::from([1, 3]))]);
    }

    #[test]
    fn sweep_is_deterministic_and_consistent() {
        let cfg = quick();
        let (train_set, test_set) = (toy_set(100, 0), toy_set(30, 3));
        let combined = run_mnist_sweep(&cfg, &train_set, &test_set, &SweepPlan::combined(&cfg), &|_| {}).unwrap();
        assert_eq!(combined.runs.len(), 2 * 2 * 2);
        let again = run_mnist_sweep(&cfg, &train_set, &test_set, &SweepPlan::combined(&cfg), &|_| {}).unwrap();
        assert_eq!(combined, again);

        let by_size = combined.by_size(&cfg.sizes, cfg.epochs);
        let by_epoch = combined.by_epoch(cfg.epoch_sweep_size, &cfg.epoch_list);
        for curve in by_size.curves.iter().chain(&by_epoch.curves) {
            assert!(curve.points.iter().all(|p| p.raw.len() == 2 && p.raw.iter().all(|a| (0.0..=1.0).contains(a))));
        }
        // The single-size epoch sweep reproduces the matching runs of the combined plan.
        let epoch_only = run_mnist_sweep(&cfg, &train_set, &test_set, &SweepPlan::epoch_sweep(&cfg), &|_| {}).unwrap();
        assert_eq!(epoch_only.by_epoch(60, &[1, 3]), by_epoch);
        assert_eq!(by_size.curves[0].points[1].raw, by_epoch.curves[0].points[1].raw);
    }

    #[test]
    fn crossover_is_the_start_of_the_final_lead() {
        let curve = |label: &str, means: &[f64]| Curve {
            label: label.into(),
            points: means.iter().enumerate().map(|(k, &m)| SweepPoint::new(k as f64, vec![m])).collect(),
        };
        let sweep = SweepResult {
            axis: "train_size".into(),
            metric: "accuracy".into(),
            curves: vec![curve("qprc", &[0.5, 0.7, 0.6, 0.8, 0.9]), curve("baseline", &[0.6, 0.6, 0.65, 0.7, 0.8])],
        };
        assert_eq!(crossover(&sweep), Some(3.0));
    }
}
