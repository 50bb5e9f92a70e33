//! Brute-force integration of the memory-kernel equations of motion for an
//! exponential (Lorentzian) kernel.
//!
//! The convolution `∫₀ᵗ λ e^{κ(t−s)} c_+(s) ds` with `κ = −γ + i·detuning` equals
//! `λ b(t)` for the auxiliary pseudomode `ḃ = κ b + c_+`, `b(0) = 0`, so the
//! integro-differential system becomes an ordinary one of size `N + 1`.

use num_complex::Complex64;

use crate::amplitude::{AmplitudeVector, Trajectory};
use crate::error::Result;
use crate::kernel::LorentzianKernel;
use crate::ode::{dopri5, Tolerance};
use crate::solver::SolverConfig;

/// Local error tolerance of the pseudomode integration.
pub const PSEUDOMODE_TOLERANCE: f64 = 1e-11;

/// Integrates the atomic equations of motion with a Lorentzian kernel and reports the
/// amplitudes on `cfg.grid()` (including `t = 0`).
pub fn solve_volterra_ode(
    c0: &AmplitudeVector,
    kernel: &LorentzianKernel,
    dipole: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    kernel.validate()?;
    cfg.validate()?;
    solve_on_grid(c0, kernel, dipole, &cfg.grid())
}

/// As [`solve_volterra_ode`] but on an arbitrary non-decreasing grid starting at 0.
pub fn solve_on_grid(c0: &AmplitudeVector, kernel: &LorentzianKernel, dipole: f64, times: &[f64]) -> Result<Trajectory> {
    let n = c0.len();
    let i = Complex64::i();
    let rate = kernel.rate();
    let lam = kernel.lam;
    let mut y0 = c0.as_slice().to_vec();
    y0.push(Complex64::new(0.0, 0.0));

    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let (c, b) = y.split_at(n);
        let c_plus: Complex64 = c.iter().sum();
        let memory = lam * b[0];
        for (d, &ci) in dy[..n].iter_mut().zip(c) {
            *d = -i * dipole * (c_plus - ci) - memory;
        }
        dy[n] = rate * b[0] + c_plus;
    };
    let tol = Tolerance { rtol: PSEUDOMODE_TOLERANCE, atol: PSEUDOMODE_TOLERANCE };
    let states = dopri5(rhs, &y0, times, tol)?;
    let samples = states
        .into_iter()
        .map(|mut s| {
            s.truncate(n);
            AmplitudeVector::from_raw(s)
        })
        .collect();
    Trajectory::new(times.to_vec(), samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn frozen_without_coupling() {
        let c0 = AmplitudeVector::new(vec![c(0.3, 0.1), c(-0.5, 0.2), c(0.1, 0.7)]).unwrap();
        let k = LorentzianKernel::new(0.0, 0.2).unwrap();
        let cfg = SolverConfig::new(1.0, 20.0).unwrap();
        let traj = solve_volterra_ode(&c0, &k, 0.0, &cfg).unwrap();
        for s in traj.samples() {
            for (a, b) in s.as_slice().iter().zip(c0.as_slice()) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn critical_single_atom_matches_limit_formula() {
        // N = 1, γ = 2, λ = 1: μ = 1 and c(t) = (1 + t) e^{−t} c(0).
        let c0 = AmplitudeVector::new(vec![c(0.6, 0.8)]).unwrap();
        let k = LorentzianKernel::new(1.0, 2.0).unwrap();
        let cfg = SolverConfig::new(0.5, 30.0).unwrap();
        let traj = solve_volterra_ode(&c0, &k, 0.0, &cfg).unwrap();
        for (t, s) in traj.times().iter().zip(traj.samples()) {
            let exact = c0[0] * (1.0 + t) * (-t).exp();
            assert!((s[0] - exact).norm() < 1e-8, "t = {t}");
        }
    }
}
