use crate::error::{Error, Result};

/// Largest number of time steps a solver will accept.
pub const MAX_STEPS: f64 = 1e7;

/// Time grid and scheme settings shared by the numerical dynamics solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Grid spacing (units 1/ω₀). Output is reported on `k·dt`, `k = 0..=t_max/dt`.
    pub dt: f64,
    pub t_max: f64,
    /// Order of the product-integration scheme; only 2 is implemented.
    pub scheme_order: u32,
    /// When set, the band-edge solver re-solves at `2·dt` and fails with
    /// [`Error::StepTooLarge`] if the Richardson error estimate exceeds this bound.
    pub monitor_tolerance: Option<f64>,
}

impl SolverConfig {
    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        let cfg = Self { dt, t_max, scheme_order: 2, monitor_tolerance: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_monitor(mut self, tolerance: f64) -> Self {
        self.monitor_tolerance = Some(tolerance);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= self.dt) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("t_max must be at least dt, got {}", self.t_max)));
        }
        if self.t_max / self.dt > MAX_STEPS {
            return Err(Error::InvalidParameter(format!(
                "t_max/dt = {:.3e} exceeds the {MAX_STEPS:e} step limit",
                self.t_max / self.dt
            )));
        }
        Ok(())
    }

    /// Number of steps `K` with `K·dt ≤ t_max` (to rounding).
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    /// The output grid `0, dt, 2dt, …, K·dt`.
    pub fn grid(&self) -> Vec<f64> {
        (0..=self.steps()).map(|k| k as f64 * self.dt).collect()
    }
}
