//! Closed-form single-excitation dynamics of `N` two-level atoms in a lossy
//! Lorentzian cavity with uniform dipole-dipole coupling.
//!
//! Writing `c_+ = Σ c_i`, every amplitude splits into a difference mode
//! `c_i − c_+/N`, which only picks up the phase `e^{iΛt}`, and the collective
//! mode, which is damped by the cavity:
//!
//! ```text
//! c_i(t) = (c_i(0) − c_+(0)/N) e^{iΛt}
//!        + (c_+(0)/N) e^{−μ* t} (cosh Γt + (μ/Γ) sinh Γt)
//!
//! Λ_FC = Λ (N − 1)
//! Γ    = ½ √(γ² − 2iγΛ_FC − Λ_FC² − 4λN)
//! μ    = ½ (γ − iΛ_FC)
//! ```
//!
//! Times are in units of 1/ω₀ and rates in units of ω₀.

use num_complex::Complex64;

use crate::amplitude::{AmplitudeVector, Trajectory};
use crate::error::{Error, Result};

/// Below this `|Γt|` the collective response uses its `Γ → 0` limit `1 + μt`.
pub const CRITICAL_DAMPING_THRESHOLD: f64 = 1e-8;

/// Physical constants of the cavity ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub n_atoms: usize,
    /// Atomic transition frequency; the unit of time.
    pub omega0: f64,
    /// Cavity coupling strength λ (units ω₀²).
    pub lam: f64,
    /// Cavity spectral width γ (units ω₀).
    pub gamma: f64,
    /// Dipole-dipole coupling Λ (units ω₀).
    pub dipole: f64,
}

impl ReservoirParams {
    pub fn new(n_atoms: usize, lam: f64, gamma: f64, dipole: f64) -> Result<Self> {
        let params = Self { n_atoms, omega0: 1.0, lam, gamma, dipole };
        params.validate()?;
        Ok(params)
    }

    /// The MNIST-experiment defaults: γ = 0.2, λ = 0.25, Λ = 0.1 (underdamped).
    pub fn mnist_default(n_atoms: usize) -> Self {
        Self { n_atoms, omega0: 1.0, lam: 0.25, gamma: 0.2, dipole: 0.1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.lam >= 0.0) || !self.lam.is_finite() {
            return Err(Error::InvalidParameter(format!("lam must be non-negative, got {}", self.lam)));
        }
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::InvalidParameter(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !self.dipole.is_finite() {
            return Err(Error::InvalidParameter("dipole must be finite".into()));
        }
        Ok(())
    }
}

/// Convenience coefficients of the closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoefficients {
    /// Collective dipole shift Λ_FC = Λ(N − 1).
    pub lambda_fc: Complex64,
    /// Γ on the principal square-root branch.
    pub big_gamma: Complex64,
    /// μ = ½(γ − iΛ_FC).
    pub mu: Complex64,
}

/// Principal square root: non-negative real part, and non-negative imaginary
/// part when the real part vanishes.
pub(crate) fn principal_sqrt(z: Complex64) -> Complex64 {
    let w = z.sqrt();
    if w.re < 0.0 || (w.re == 0.0 && w.im < 0.0) {
        -w
    } else {
        w
    }
}

pub fn derived_coefficients(params: &ReservoirParams) -> DerivedCoefficients {
    let n = params.n_atoms as f64;
    let lambda_fc = Complex64::new(params.dipole * (n - 1.0), 0.0);
    let g = params.gamma;
    let i = Complex64::i();
    let discriminant = g * g - 2.0 * i * g * lambda_fc - lambda_fc * lambda_fc - 4.0 * params.lam * n;
    let big_gamma = 0.5 * principal_sqrt(discriminant);
    let mu = 0.5 * (g - i * lambda_fc);
    DerivedCoefficients { lambda_fc, big_gamma, mu }
}

/// `e^{−μ* t}(cosh Γt + (μ/Γ) sinh Γt)`: the collective-mode propagator.
pub fn collective_response(coeffs: &DerivedCoefficients, t: f64) -> Complex64 {
    let mu = coeffs.mu;
    let gamma = coeffs.big_gamma;
    let x = gamma * t;
    if x.norm() < CRITICAL_DAMPING_THRESHOLD {
        return (-mu.conj() * t).exp() * (1.0 + mu * t);
    }
    if x.re.abs() < 20.0 {
        (-mu.conj() * t).exp() * (x.cosh() + mu / gamma * x.sinh())
    } else {
        // cosh/sinh overflow long before the damped product does.
        let ratio = mu / gamma;
        0.5 * (1.0 + ratio) * ((gamma - mu.conj()) * t).exp()
            + 0.5 * (1.0 - ratio) * ((-gamma - mu.conj()) * t).exp()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("evolution time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

fn check_dimension(c0: &AmplitudeVector, params: &ReservoirParams) -> Result<()> {
    if c0.len() != params.n_atoms {
        return Err(Error::DimensionMismatch { expected: params.n_atoms, got: c0.len() });
    }
    Ok(())
}

fn evolve_with(c0: &AmplitudeVector, params: &ReservoirParams, coeffs: &DerivedCoefficients, t: f64) -> AmplitudeVector {
    if t == 0.0 {
        return c0.clone();
    }
    let n = params.n_atoms as f64;
    let mean = c0.collective() / n;
    let phase = Complex64::new(0.0, params.dipole * t).exp();
    let collective = mean * collective_response(coeffs, t);
    let values = c0.as_slice().iter().map(|&c| (c - mean) * phase + collective).collect();
    AmplitudeVector::from_raw(values)
}

/// Amplitudes `c_i(t)` evolved from `c0` by the closed-form solution.
pub fn evolve_amplitudes(c0: &AmplitudeVector, params: &ReservoirParams, t: f64) -> Result<AmplitudeVector> {
    params.validate()?;
    check_dimension(c0, params)?;
    check_time(t)?;
    Ok(evolve_with(c0, params, &derived_coefficients(params), t))
}

/// The uniform sampling grid `t_j = j·t_max/n_steps`, `j = 1..=n_steps`.
pub fn sample_times(n_steps: usize, t_max: f64) -> Vec<f64> {
    (1..=n_steps).map(|j| j as f64 * t_max / n_steps as f64).collect()
}

/// Reservoir response on the grid `t_j = j·t_max/n_steps`, `j = 1..=n_steps`.
///
/// `t = 0` is the input itself and is not part of the response.
pub fn sample_trajectory(
    c0: &AmplitudeVector,
    params: &ReservoirParams,
    n_steps: usize,
    t_max: f64,
) -> Result<Trajectory> {
    params.validate()?;
    check_dimension(c0, params)?;
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    let coeffs = derived_coefficients(params);
    let times = sample_times(n_steps, t_max);
    let samples = times.iter().map(|&t| evolve_with(c0, params, &coeffs, t)).collect();
    Trajectory::new(times, samples)
}
