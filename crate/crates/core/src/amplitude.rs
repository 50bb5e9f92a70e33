//! Single-excitation state vectors and sampled trajectories.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Slack allowed on the unit-norm bound of physical states.
pub const NORM_SLACK: f64 = 1e-12;

/// Excited-state amplitudes `c_i` of an `N`-atom ensemble in the single-excitation sector.
///
/// The ground-state amplitude is not stored; it carries no dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(Vec<Complex64>);

impl AmplitudeVector {
    /// Builds a physical state, rejecting vectors with `Σ|c_i|² > 1`.
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("amplitude vector must be non-empty".into()));
        }
        if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("amplitudes must be finite".into()));
        }
        let norm = norm_sqr(&values);
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::NormExceeded(norm));
        }
        Ok(Self(values))
    }

    /// Wraps solver output without the norm check.
    pub(crate) fn from_raw(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// `Σ|c_i|²`, the total excited population.
    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    /// Collective amplitude `c_+ = Σ c_i`.
    pub fn collective(&self) -> Complex64 {
        self.0.iter().sum()
    }

    /// Per-atom populations `|c_i|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.norm_sqr()).collect()
    }
}

impl std::ops::Index<usize> for AmplitudeVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

fn norm_sqr(values: &[Complex64]) -> f64 {
    values.iter().map(|c| c.norm_sqr()).sum()
}

/// Amplitudes sampled on a strictly increasing time grid (units of 1/ω₀).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    samples: Vec<AmplitudeVector>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, samples: Vec<AmplitudeVector>) -> Result<Self> {
        if times.len() != samples.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: samples.len() });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("trajectory times must be strictly increasing".into()));
        }
        if let Some(first) = samples.first() {
            let n = first.len();
            if let Some(bad) = samples.iter().find(|s| s.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
            }
        }
        Ok(Self { times, samples })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[AmplitudeVector] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of atoms per sample (0 for an empty trajectory).
    pub fn n_atoms(&self) -> usize {
        self.samples.first().map_or(0, AmplitudeVector::len)
    }

    /// Picks the samples at `times`, each of which must lie on this trajectory's grid
    /// to within `1e-9` relative.
    pub fn resample(&self, times: &[f64]) -> Result<Trajectory> {
        let mut samples = Vec::with_capacity(times.len());
        let mut cursor = 0;
        for &t in times {
            let tol = 1e-9 * t.abs().max(1.0);
            while cursor < self.times.len() && self.times[cursor] < t - tol {
                cursor += 1;
            }
            match self.times.get(cursor) {
                Some(&found) if (found - t).abs() <= tol => samples.push(self.samples[cursor].clone()),
                _ => return Err(Error::Domain(format!("time {t} is not on the trajectory grid"))),
            }
        }
        Trajectory::new(times.to_vec(), samples)
    }

    /// Writes the trajectory as CSV: `t, Re(c_1), Im(c_1), …`, one row per time point.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        write!(out, "t")?;
        for i in 1..=self.n_atoms() {
            write!(out, ",re_c{i},im_c{i}")?;
        }
        writeln!(out)?;
        for (t, sample) in self.times.iter().zip(&self.samples) {
            write!(out, "{t}")?;
            for c in sample.as_slice() {
                write!(out, ",{},{}", c.re, c.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Writes per-atom populations `|c_i(t)|²` as CSV: `t, p_1, …, p_N`.
    pub fn write_population_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        write!(out, "t")?;
        for i in 1..=self.n_atoms() {
            write!(out, ",p{i}")?;
        }
        writeln!(out)?;
        for (t, sample) in self.times.iter().zip(&self.samples) {
            write!(out, "{t}")?;
            for p in sample.populations() {
                write!(out, ",{p}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
