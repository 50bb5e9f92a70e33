//! Regression error over a grid of reservoir and target spectral widths, for
//! several reservoir run times. Reservoir and target share the sampling grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, TargetKind};
use crate::dynamics::{dynamics_seed, run_regression_for, RegressionProblem};
use crate::error::Result;
use crate::stats::mean_std;

/// Mean `log₁₀` test error, indexed `[run time][γ_res][γ_target]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapReport {
    pub run_times: Vec<f64>,
    pub gammas_res: Vec<f64>,
    pub gammas_target: Vec<f64>,
    pub errors: Vec<Vec<Vec<f64>>>,
}

impl HeatmapReport {
    /// Mean over all cells for run time index `k`.
    pub fn grid_mean(&self, k: usize) -> f64 {
        let cells: Vec<f64> = self.errors[k].iter().flatten().copied().collect();
        mean_std(&cells).0
    }

    /// Rows whose diagonal cell is worse than every off-diagonal cell of the row.
    /// Only meaningful on square grids with matching axes.
    pub fn diagonal_violations(&self, k: usize) -> Vec<usize> {
        let grid = &self.errors[k];
        (0..grid.len().min(self.gammas_target.len()))
            .filter(|&r| {
                let off = grid[r].iter().enumerate().filter(|&(c, _)| c != r).map(|(_, &v)| v);
                let row_max = off.fold(f64::NEG_INFINITY, f64::max);
                row_max.is_finite() && grid[r][r] > row_max
            })
            .collect()
    }

    /// Matrix CSV for run time index `k`: rows γ_res, columns γ_target.
    pub fn to_csv(&self, k: usize) -> String {
        let mut out = String::from("gamma_res");
        for g in &self.gammas_target {
            out.push_str(&format!(",gamma_target_{g}"));
        }
        out.push('\n');
        for (g, row) in self.gammas_res.iter().zip(&self.errors[k]) {
            out.push_str(&g.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_gamma_heatmap(cfg: &ExperimentConfig) -> Result<HeatmapReport> {
    let seed = dynamics_seed(cfg);
    let mut cells = Vec::new();
    for (k, &t) in cfg.heatmap_run_times.iter().enumerate() {
        for (r, &gr) in cfg.heatmap_gammas_res.iter().enumerate() {
            for (c, &gt) in cfg.heatmap_gammas_target.iter().enumerate() {
                cells.push((k, r, c, t, gr, gt));
            }
        }
    }
    let results: Vec<f64> = cells
        .par_iter()
        .map(|&(_, _, _, t, gr, gt)| {
            let cell_cfg = ExperimentConfig {
                target: TargetKind::Lorentzian,
                reservoir_t_max: t,
                target_t_max: if cfg.heatmap_target_t_max > 0.0 { cfg.heatmap_target_t_max } else { t },
                ..cfg.clone()
            };
            let problem = RegressionProblem::build(&cell_cfg, gr, gt)?;
            Ok(run_regression_for(&cell_cfg, &problem, seed, cfg.heatmap_epochs)?.mean_log10_error)
        })
        .collect::<Result<_>>()?;
    let mut errors =
        vec![vec![vec![f64::NAN; cfg.heatmap_gammas_target.len()]; cfg.heatmap_gammas_res.len()]; cfg.heatmap_run_times.len()];
    for (&(k, r, c, ..), v) in cells.iter().zip(results) {
        errors[k][r][c] = v;
    }
    Ok(HeatmapReport {
        run_times: cfg.heatmap_run_times.clone(),
        gammas_res: cfg.heatmap_gammas_res.clone(),
        gammas_target: cfg.heatmap_gammas_target.clone(),
        errors,
    })
}
