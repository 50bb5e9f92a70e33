//! Semi-analytic oracle for the collective amplitude via its Laplace transform
//!
//! ```text
//! c̃_+(s) = c_+(0) / (s + iΛ_FC + N·G̃(s)).
//! ```
//!
//! Poles of `c̃_+` on the physical sheet are located by polynomial root finding and
//! inverted exactly as residues. What remains is analytic off the branch cut of `G̃`
//! and is inverted numerically along a Talbot contour (Weideman's optimised
//! cotangent contour, 64 trapezoidal nodes) wrapped around the cut. Subtracting the
//! poles keeps the contour valid for oscillating poles at any `t` and keeps the
//! `e^{st}` amplification within double precision.
//!
//! The Lorentzian transform is rational, so its inverse is the two-pole residue sum
//! with no contour remainder. The band-edge transform has a square-root cut from
//! `iδ` to `iδ − ∞`; with `w = √(s − iδ)` its poles are the roots of
//! `w³ + i(δ + Λ_FC)w + N·K = 0` with `Re w > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::amplitude::AmplitudeVector;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, LorentzianKernel, PbgKernel};
use crate::reservoir::principal_sqrt;

/// Number of contour nodes.
pub const TALBOT_NODES: usize = 64;

const CONTOUR_SIGMA: f64 = -0.6122;
const CONTOUR_MU: f64 = 0.5017;
const CONTOUR_ALPHA: f64 = 0.6407;
const CONTOUR_NU: f64 = 0.2645;

/// Inverts `f` at `t > 0` along the cotangent Talbot contour translated to `shift`.
/// All singularities of `f` must lie left of the contour, i.e. inside the parabola-like
/// region around `shift + (−∞, 0]`.
pub fn talbot_invert<F: Fn(Complex64) -> Complex64>(f: F, t: f64, shift: Complex64) -> Result<Complex64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("contour inversion needs t > 0, got {t}")));
    }
    let attempt = |scale: f64| -> Option<Complex64> {
        let m = TALBOT_NODES as f64;
        let h = 2.0 * PI / m;
        let r = scale * m / t;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..TALBOT_NODES {
            let theta = -PI + (k as f64 + 0.5) * h;
            let a = CONTOUR_ALPHA * theta;
            let cot = a.cos() / a.sin();
            let z = Complex64::new(CONTOUR_SIGMA + CONTOUR_MU * theta * cot, CONTOUR_NU * theta);
            let dz = Complex64::new(CONTOUR_MU * (cot - a / a.sin().powi(2)), CONTOUR_NU);
            let s = shift + r * z;
            let term = (s * t).exp() * f(s) * r * dz;
            if !term.re.is_finite() || !term.im.is_finite() {
                return None;
            }
            acc += term;
        }
        Some(acc * h / Complex64::new(0.0, 2.0 * PI))
    };
    // A node landing on a singularity is retried once on a slightly dilated contour.
    attempt(1.0).or_else(|| attempt(1.013)).ok_or(Error::BranchCut(t))
}

/// All roots of the polynomial with coefficients `coeffs` (highest degree first), by
/// Aberth–Ehrlich iteration followed by Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let lead = coeffs
        .iter()
        .position(|c| c.norm() != 0.0)
        .ok_or_else(|| Error::Domain("zero polynomial has no roots".into()))?;
    let monic: Vec<Complex64> = coeffs[lead..].iter().map(|c| c / coeffs[lead]).collect();
    let degree = monic.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &monic {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let radius = 1.0 + monic[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * PI * k as f64 / degree as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut largest = 0.0_f64;
        for k in 0..degree {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                largest = largest.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if largest < 1e-15 {
            break;
        }
    }
    for root in &mut z {
        for _ in 0..3 {
            let (p, dp) = eval(*root);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.re.is_finite() && step.im.is_finite() {
                *root -= step;
            }
        }
    }
    Ok(z)
}

/// `(e^z − 1)/z`, accurate near `z = 0`.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Exact two-pole inverse for the rational Lorentzian transform.
fn lorentzian_collective(c_plus0: Complex64, k: &LorentzianKernel, n: f64, lambda_fc: f64, times: &[f64]) -> Result<Vec<Complex64>> {
    let i = Complex64::i();
    let r = k.rate();
    // (s + iΛ_FC)(s − r) + Nλ
    let coeffs = [Complex64::new(1.0, 0.0), i * lambda_fc - r, -i * lambda_fc * r + n * k.lam];
    let mut roots = polynomial_roots(&coeffs)?;
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    let (s1, s2) = (roots[0], roots[1]);
    // [(s1 − r)e^{s1 t} − (s2 − r)e^{s2 t}]/(s1 − s2) with Re(s1 − s2) ≤ 0
    Ok(times
        .iter()
        .map(|&t| c_plus0 * ((s1 * t).exp() + (s2 - r) * t * (s2 * t).exp() * phi1((s1 - s2) * t)))
        .collect())
}

/// Physical-sheet poles and residues of `1/D(s)` for the band-edge kernel.
fn pbg_poles(k: &PbgKernel, n: f64, lambda_fc: f64) -> Result<Vec<(Complex64, Complex64)>> {
    let i = Complex64::i();
    let nk = n * k.strength();
    let coeffs = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), i * (k.delta + lambda_fc), nk];
    let mut poles = Vec::new();
    for w in polynomial_roots(&coeffs)? {
        if w.re <= 1e-12 || w.norm() < 1e-12 {
            continue;
        }
        let derivative = 1.0 - nk / (2.0 * w * w * w);
        if derivative.norm() < 1e-8 {
            return Err(Error::Domain("coalescing band-edge poles are not supported by the oracle".into()));
        }
        poles.push((w * w + k.branch_point(), 1.0 / derivative));
    }
    Ok(poles)
}

fn pbg_collective(c_plus0: Complex64, k: &PbgKernel, n: f64, lambda_fc: f64, times: &[f64]) -> Result<Vec<Complex64>> {
    let i = Complex64::i();
    if k.beta == 0.0 {
        return Ok(times.iter().map(|&t| c_plus0 * (-i * lambda_fc * t).exp()).collect());
    }
    let poles = pbg_poles(k, n, lambda_fc)?;
    let remainder = |s: Complex64| {
        let full = 1.0 / (s + i * lambda_fc + n * k.strength() / principal_sqrt(s - k.branch_point()));
        poles.iter().fold(full, |acc, &(p, res)| acc - res / (s - p))
    };
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(c_plus0);
            }
            let pole_part: Complex64 = poles.iter().map(|&(p, res)| res * (p * t).exp()).sum();
            let cut_part = talbot_invert(remainder, t, k.branch_point())?;
            Ok(c_plus0 * (pole_part + cut_part))
        })
        .collect()
}

/// Collective amplitude `c_+(t)` at each of `times` (non-negative).
pub fn laplace_collective_oracle(
    c_plus0: Complex64,
    kernel: &Kernel,
    n_atoms: usize,
    dipole: f64,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    kernel.validate()?;
    if n_atoms == 0 {
        return Err(Error::InvalidParameter("n_atoms must be positive".into()));
    }
    if let Some(&bad) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::Domain(format!("oracle times must be finite and non-negative, got {bad}")));
    }
    let n = n_atoms as f64;
    let lambda_fc = dipole * (n - 1.0);
    match kernel {
        Kernel::Lorentzian(k) => lorentzian_collective(c_plus0, k, n, lambda_fc, times),
        Kernel::Pbg(k) => pbg_collective(c_plus0, k, n, lambda_fc, times),
    }
}

/// Full amplitude vectors: difference modes `c_i − c_+/N` rotate as `e^{iΛt}`.
pub fn laplace_amplitude_oracle(c0: &AmplitudeVector, kernel: &Kernel, dipole: f64, times: &[f64]) -> Result<Vec<AmplitudeVector>> {
    let n = c0.len() as f64;
    let c_plus0 = c0.collective();
    let collective = laplace_collective_oracle(c_plus0, kernel, c0.len(), dipole, times)?;
    Ok(times
        .iter()
        .zip(collective)
        .map(|(&t, c_plus)| {
            let phase = Complex64::new(0.0, dipole * t).exp();
            AmplitudeVector::from_raw(c0.as_slice().iter().map(|&ci| (ci - c_plus0 / n) * phase + c_plus / n).collect())
        })
        .collect())
}
