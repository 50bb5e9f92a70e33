//! Memory kernels `G(t)` of the atomic equations of motion
//!
//! ```text
//! ċ_i = −iΛ(c_+ − c_i) − ∫₀ᵗ G(t − t₁) c_+(t₁) dt₁
//! ```
//!
//! and their Laplace transforms `G̃(s)`.
//!
//! The Lorentzian kernel is normalised as `G(t) = λ e^{−γt}`. With this
//! convention the Laplace poles of `1/(s + iΛ_FC + Nλ/(s + γ))` are exactly the
//! exponents `−μ* ± Γ` of the closed-form solution in [`crate::reservoir`].
//!
//! The band-edge kernel `G̃(s) = β^{3/2} e^{−iπ/4} (s − iδ)^{−1/2}` inverts, via
//! `t^{−1/2} ↔ √(π/s)`, to `G(t) = β^{3/2} e^{−iπ/4} e^{iδt} / √(πt)`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::reservoir::principal_sqrt;

/// Exponential kernel of a lossy cavity with Lorentzian spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianKernel {
    pub lam: f64,
    pub gamma: f64,
    /// Cavity detuning ω₀ − ω_c.
    pub detuning: f64,
}

impl LorentzianKernel {
    pub fn new(lam: f64, gamma: f64) -> Result<Self> {
        let k = Self { lam, gamma, detuning: 0.0 };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("kernel gamma must be positive, got {}", self.gamma)));
        }
        if !(self.lam >= 0.0) || !self.lam.is_finite() {
            return Err(Error::InvalidParameter(format!("kernel lam must be non-negative, got {}", self.lam)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidParameter("kernel detuning must be finite".into()));
        }
        Ok(())
    }

    /// Exponent `−γ + i·detuning` of the kernel.
    pub fn rate(&self) -> Complex64 {
        Complex64::new(-self.gamma, self.detuning)
    }

    pub fn laplace(&self, s: Complex64) -> Complex64 {
        self.lam / (s - self.rate())
    }
}

/// `G(t) = λ e^{−γt} e^{i·detuning·t}`.
pub fn lorentzian_kernel_value(k: &LorentzianKernel, t: f64) -> Complex64 {
    k.lam * (k.rate() * t).exp()
}

/// Isotropic band-edge kernel of a photonic band gap material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbgKernel {
    /// Coupling strength β (units ω₀).
    pub beta: f64,
    /// Detuning ω₀ − ω_I from the band edge.
    pub delta: f64,
}

impl PbgKernel {
    pub fn new(beta: f64, delta: f64) -> Result<Self> {
        let k = Self { beta, delta };
        k.validate()?;
        Ok(k)
    }

    /// Defaults used by the dynamics experiments: β = 1, δ = 0.
    pub fn experiment_default() -> Self {
        Self { beta: 1.0, delta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be non-negative, got {}", self.beta)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(())
    }

    /// `β^{3/2} e^{−iπ/4}`.
    pub fn strength(&self) -> Complex64 {
        self.beta.powf(1.5) * Complex64::from_polar(1.0, -FRAC_PI_4)
    }

    /// Branch point `iδ` of `G̃`.
    pub fn branch_point(&self) -> Complex64 {
        Complex64::new(0.0, self.delta)
    }

    pub fn laplace(&self, s: Complex64) -> Complex64 {
        if self.beta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.strength() / principal_sqrt(s - self.branch_point())
    }
}

/// `G(t) = β^{3/2} e^{−iπ/4} e^{iδt} / √(πt)`; diverges at `t = 0`.
pub fn pbg_kernel_value(k: &PbgKernel, t: f64) -> Result<Complex64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("band-edge kernel is defined for t > 0, got {t}")));
    }
    Ok(k.strength() * Complex64::new(0.0, k.delta * t).exp() / (PI * t).sqrt())
}

/// Either memory kernel, for routines that accept both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Lorentzian(LorentzianKernel),
    Pbg(PbgKernel),
}

impl Kernel {
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        match self {
            Kernel::Lorentzian(k) => k.laplace(s),
            Kernel::Pbg(k) => k.laplace(s),
        }
    }

    pub fn value(&self, t: f64) -> Result<Complex64> {
        match self {
            Kernel::Lorentzian(k) => {
                if !(t >= 0.0) {
                    return Err(Error::Domain(format!("kernel time must be non-negative, got {t}")));
                }
                Ok(lorentzian_kernel_value(k, t))
            }
            Kernel::Pbg(k) => pbg_kernel_value(k, t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Lorentzian(k) => k.validate(),
            Kernel::Pbg(k) => k.validate(),
        }
    }
}

impl From<LorentzianKernel> for Kernel {
    fn from(k: LorentzianKernel) -> Self {
        Kernel::Lorentzian(k)
    }
}

impl From<PbgKernel> for Kernel {
    fn from(k: PbgKernel) -> Self {
        Kernel::Pbg(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_values() {
        let k = LorentzianKernel::new(0.25, 0.2).unwrap();
        assert_eq!(lorentzian_kernel_value(&k, 0.0), Complex64::new(0.25, 0.0));
        let v = lorentzian_kernel_value(&k, 5.0);
        assert!((v.re - 0.091_969_860_292_860_58).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        let zero = LorentzianKernel::new(0.0, 0.2).unwrap();
        assert_eq!(lorentzian_kernel_value(&zero, 3.0).norm(), 0.0);
    }

    #[test]
    fn pbg_values() {
        let k = PbgKernel::new(1.0, 0.0).unwrap();
        let v = pbg_kernel_value(&k, 1.0 / PI).unwrap();
        assert!((v - Complex64::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-15);
        let zero = PbgKernel::new(0.0, 0.3).unwrap();
        assert_eq!(pbg_kernel_value(&zero, 2.0).unwrap().norm(), 0.0);
        assert!(matches!(pbg_kernel_value(&k, 0.0), Err(Error::Domain(_))));
        assert!(pbg_kernel_value(&k, -1.0).is_err());
    }

    /// ∫₀^T e^{−st} G(t) dt by Gauss–Legendre on the substitution t = u²,
    /// which removes the t^{−1/2} singularity.
    fn numerical_laplace(k: &PbgKernel, s: Complex64, t_end: f64) -> Complex64 {
        let nodes = gauss_legendre(64);
        let u_end = t_end.sqrt();
        let panels = 400;
        let h = u_end / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = p as f64 * h;
            for &(x, w) in &nodes {
                let u = a + 0.5 * h * (x + 1.0);
                let t = u * u;
                let integrand = if u == 0.0 {
                    // u·t^{−1/2} → 1
                    k.strength() / PI.sqrt()
                } else {
                    pbg_kernel_value(k, t).unwrap() * u
                };
                total += 0.5 * h * w * 2.0 * integrand * (-s * t).exp();
            }
        }
        total
    }

    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    #[test]
    fn pbg_time_domain_kernel_reproduces_its_laplace_transform() {
        let k = PbgKernel::new(1.0, 0.0).unwrap();
        for s in [Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(2.0, -0.5)] {
            let numeric = numerical_laplace(&k, s, 200.0);
            let exact = k.laplace(s);
            assert!((numeric - exact).norm() / exact.norm() < 1e-4, "s = {s}: {numeric} vs {exact}");
        }
    }

    #[test]
    fn detuned_pbg_kernel_reproduces_its_laplace_transform() {
        let k = PbgKernel::new(0.7, 0.4).unwrap();
        let s = Complex64::new(1.5, 0.3);
        let numeric = numerical_laplace(&k, s, 200.0);
        assert!((numeric - k.laplace(s)).norm() / k.laplace(s).norm() < 1e-4);
    }

    #[test]
    fn lorentzian_laplace_matches_closed_integral() {
        let k = LorentzianKernel { lam: 0.25, gamma: 0.2, detuning: 0.3 };
        let s = Complex64::new(0.5, 0.1);
        // ∫ λ e^{(−γ + iΔ − s)t} dt = λ / (s + γ − iΔ)
        let expected = 0.25 / (s + 0.2 - Complex64::new(0.0, 0.3));
        assert!((k.laplace(s) - expected).norm() < 1e-15);
    }
}
