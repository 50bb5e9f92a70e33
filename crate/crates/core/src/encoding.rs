//! Input map from data to reservoir initial conditions and output map from
//! trajectories to real feature vectors.
//!
//! Feature layout: for each sample time `t_j`, for each atom `i`, the pair
//! `[Re c_i(t_j), Im c_i(t_j)]`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::amplitude::{AmplitudeVector, Trajectory, NORM_SLACK};
use crate::error::{Error, Result};
use crate::reservoir::{collective_response, derived_coefficients, sample_times, ReservoirParams};

/// Flattened real and imaginary trajectory components.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Entries must be finite with modulus at most 1.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + NORM_SLACK) {
            return Err(Error::InvalidParameter(format!("feature entry {bad} is not a finite value in [-1, 1]")));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Pixel pairs `(P_{2i}, P_{2i+1})` in row-major order become `c_i ∝ P_{2i} + iP_{2i+1}`,
/// normalised over the atoms.
pub fn encode_image(pixels: &[u8]) -> Result<AmplitudeVector> {
    if pixels.is_empty() || pixels.len() % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "pixel count must be even and positive, got {}",
            pixels.len()
        )));
    }
    let norm = pixels.iter().map(|&p| f64::from(p).powi(2)).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("an all-zero image has no normalised encoding".into()));
    }
    let values = pixels
        .chunks_exact(2)
        .map(|pair| Complex64::new(f64::from(pair[0]) / norm, f64::from(pair[1]) / norm))
        .collect();
    AmplitudeVector::new(values)
}

/// Baseline input: pixels scaled to `[0, 1]`.
pub fn baseline_features(pixels: &[u8], out: &mut [f64]) {
    for (o, &p) in out.iter_mut().zip(pixels) {
        *o = f64::from(p) / 255.0;
    }
}

fn write_sample(sample: &AmplitudeVector, out: &mut [f64]) {
    for (pair, c) in out.chunks_exact_mut(2).zip(sample.as_slice()) {
        pair[0] = c.re;
        pair[1] = c.im;
    }
}

pub fn features_from_trajectory(traj: &Trajectory) -> FeatureVector {
    let n = traj.n_atoms();
    let mut values = vec![0.0; 2 * n * traj.len()];
    for (chunk, sample) in values.chunks_exact_mut(2 * n.max(1)).zip(traj.samples()) {
        write_sample(sample, chunk);
    }
    FeatureVector(values)
}

/// Inverse of [`features_from_trajectory`] given the sample times.
pub fn trajectory_from_features(features: &FeatureVector, times: &[f64]) -> Result<Trajectory> {
    let values = features.as_slice();
    if times.is_empty() || values.len() % (2 * times.len()) != 0 || values.is_empty() {
        return Err(Error::DimensionMismatch { expected: 2 * times.len(), got: values.len() });
    }
    let n = values.len() / (2 * times.len());
    let samples = values
        .chunks_exact(2 * n)
        .map(|chunk| AmplitudeVector::new(chunk.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), samples)
}

/// The reservoir starts from exactly the target system's initial condition.
pub fn encode_quantum_state(c0: &AmplitudeVector) -> AmplitudeVector {
    c0.clone()
}

/// `count` unit vectors, each component a standard complex Gaussian before
/// normalisation (the uniform measure on the sphere). Deterministic in `seed`.
pub fn sample_random_initial_conditions(n_atoms: usize, count: usize, seed: u64) -> Result<Vec<AmplitudeVector>> {
    if n_atoms == 0 || count == 0 {
        return Err(Error::InvalidParameter(format!(
            "need at least one atom and one sample, got n_atoms={n_atoms}, count={count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let raw: Vec<Complex64> = (0..n_atoms)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            AmplitudeVector::new(raw.into_iter().map(|c| c / norm).collect())
        })
        .collect()
}

/// The reservoir feature map `c0 ↦ features(sample_trajectory(c0))` with the
/// time-dependent factors precomputed, for use on many inputs.
#[derive(Debug, Clone)]
pub struct ReservoirFeatureMap {
    n_atoms: usize,
    times: Vec<f64>,
    /// `e^{iΛt_j}` acting on the difference modes.
    phases: Vec<Complex64>,
    /// Collective propagator at `t_j`.
    responses: Vec<Complex64>,
}

impl ReservoirFeatureMap {
    pub fn new(params: &ReservoirParams, n_steps: usize, t_max: f64) -> Result<Self> {
        params.validate()?;
        if n_steps == 0 || !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sampling needs n_steps ≥ 1 and t_max > 0, got {n_steps} and {t_max}"
            )));
        }
        let coeffs = derived_coefficients(params);
        let times = sample_times(n_steps, t_max);
        let phases = times.iter().map(|&t| Complex64::new(0.0, params.dipole * t).exp()).collect();
        let responses = times.iter().map(|&t| collective_response(&coeffs, t)).collect();
        Ok(Self { n_atoms: params.n_atoms, times, phases, responses })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn feature_len(&self) -> usize {
        2 * self.n_atoms * self.times.len()
    }

    /// Writes the features of `c0` into `out[..feature_len()]`.
    pub fn write_features(&self, c0: &AmplitudeVector, out: &mut [f64]) -> Result<()> {
        self.write_features_as(c0, out, |v| v)
    }

    /// [`Self::write_features`] into any element type via `cast`.
    pub fn write_features_as<T>(&self, c0: &AmplitudeVector, out: &mut [T], cast: impl Fn(f64) -> T) -> Result<()> {
        if c0.len() != self.n_atoms {
            return Err(Error::DimensionMismatch { expected: self.n_atoms, got: c0.len() });
        }
        if out.len() < self.feature_len() {
            return Err(Error::DimensionMismatch { expected: self.feature_len(), got: out.len() });
        }
        let mean = c0.collective() / self.n_atoms as f64;
        for ((chunk, &phase), &response) in out.chunks_exact_mut(2 * self.n_atoms).zip(&self.phases).zip(&self.responses) {
            let collective = mean * response;
            for (pair, &c) in chunk.chunks_exact_mut(2).zip(c0.as_slice()) {
                let v = (c - mean) * phase + collective;
                pair[0] = cast(v.re);
                pair[1] = cast(v.im);
            }
        }
        Ok(())
    }

    pub fn features(&self, c0: &AmplitudeVector) -> Result<FeatureVector> {
        let mut values = vec![0.0; self.feature_len()];
        self.write_features(c0, &mut values)?;
        Ok(FeatureVector(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::sample_trajectory;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn image_examples() {
        let v = encode_image(&[255, 0, 0, 255]).unwrap();
        assert!((v[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        let single = encode_image(&[128, 0]).unwrap();
        assert_eq!(single.len(), 1);
        assert!((single[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn image_encoding_is_scale_invariant_and_injective_on_rays() {
        let a = encode_image(&[10, 20, 30, 40, 0, 5]).unwrap();
        let b = encode_image(&[20, 40, 60, 80, 0, 10]).unwrap();
        for k in 0..3 {
            assert!((a[k] - b[k]).norm() < 1e-15);
        }
        let other = encode_image(&[10, 20, 30, 41, 0, 5]).unwrap();
        assert!((0..3).any(|k| (a[k] - other[k]).norm() > 1e-6));
    }

    #[test]
    fn image_errors() {
        assert!(matches!(encode_image(&[0, 0, 0, 0]), Err(Error::Domain(_))));
        assert!(encode_image(&[1, 2, 3]).is_err());
        assert!(encode_image(&[]).is_err());
    }

    #[test]
    fn mnist_sized_image_gives_392_atoms() {
        let pixels: Vec<u8> = (0..784).map(|k| (k % 256) as u8).collect();
        let v = encode_image(&pixels).unwrap();
        assert_eq!(v.len(), 392);
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((v[1].re / v[1].im - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_sample_features() {
        let traj = Trajectory::new(vec![1.0], vec![AmplitudeVector::new(vec![c(0.6, 0.8)]).unwrap()]).unwrap();
        assert_eq!(features_from_trajectory(&traj).as_slice(), &[0.6, 0.8]);
    }

    #[test]
    fn round_trip_and_fast_path_agree() {
        let params = ReservoirParams::mnist_default(5);
        let c0 = sample_random_initial_conditions(5, 1, 3).unwrap().remove(0);
        let traj = sample_trajectory(&c0, &params, 50, 50.0).unwrap();
        let feats = features_from_trajectory(&traj);
        assert_eq!(feats.len(), 2 * 5 * 50);
        let back = trajectory_from_features(&feats, traj.times()).unwrap();
        assert_eq!(back, traj);
        let map = ReservoirFeatureMap::new(&params, 50, 50.0).unwrap();
        let fast = map.features(&c0).unwrap();
        for (a, b) in fast.as_slice().iter().zip(feats.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_collective_mode_keeps_moduli() {
        let c0 = AmplitudeVector::new(vec![c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5)]).unwrap();
        let map = ReservoirFeatureMap::new(&ReservoirParams::mnist_default(4), 20, 30.0).unwrap();
        let f = map.features(&c0).unwrap();
        for chunk in f.as_slice().chunks_exact(8) {
            for (pair, c) in chunk.chunks_exact(2).zip(c0.as_slice()) {
                assert!((pair[0].hypot(pair[1]) - c.norm()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn quantum_state_passes_through() {
        let c0 = AmplitudeVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert_eq!(encode_quantum_state(&c0), c0);
    }

    #[test]
    fn random_states_are_normalised_and_seeded() {
        let a = sample_random_initial_conditions(4, 1500, 7).unwrap();
        assert_eq!(a.len(), 1500);
        assert!(a.iter().all(|v| (v.norm_sqr() - 1.0).abs() < 1e-12));
        assert_eq!(a, sample_random_initial_conditions(4, 1500, 7).unwrap());
        assert_ne!(a, sample_random_initial_conditions(4, 1500, 8).unwrap());
        assert!(sample_random_initial_conditions(4, 0, 7).is_err());
    }

    #[test]
    fn feature_vector_bounds() {
        assert!(FeatureVector::new(vec![0.5, -1.0]).is_ok());
        assert!(FeatureVector::new(vec![1.5]).is_err());
        assert!(FeatureVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn baseline_scaling() {
        let mut out = [0.0; 3];
        baseline_features(&[0, 255, 51], &mut out);
        assert_eq!(out, [0.0, 1.0, 0.2]);
    }

    /// Measured once over 200 random pairs at N = 8 (worst ratio 7.066); frozen with margin.
    const FEATURE_LIPSCHITZ: f64 = 7.08;

    #[test]
    fn feature_map_is_lipschitz() {
        let map = ReservoirFeatureMap::new(&ReservoirParams::mnist_default(8), 50, 50.0).unwrap();
        let base = sample_random_initial_conditions(8, 200, 1).unwrap();
        let directions = sample_random_initial_conditions(8, 200, 2).unwrap();
        let eps = 1e-6;
        for (b, d) in base.iter().zip(&directions) {
            let moved = b.as_slice().iter().zip(d.as_slice()).map(|(&x, &y)| x * (1.0 - eps) + y * eps * 0.5);
            let moved = AmplitudeVector::new(moved.collect()).unwrap();
            let input_shift = b.as_slice().iter().zip(moved.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            let (fa, fb) = (map.features(b).unwrap(), map.features(&moved).unwrap());
            let output_shift = fa.as_slice().iter().zip(fb.as_slice()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(output_shift <= FEATURE_LIPSCHITZ * input_shift);
        }
    }
}
