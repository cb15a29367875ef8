//! Lowest-frequency starting shape: circle fit followed by a three-mode
//! regularized Gauss-Newton refinement about the fitted center.

use serde::{Deserialize, Serialize};

use super::simplex::nelder_mead;
use super::{newton_at_frequency, TraceRow};
use crate::error::{Error, Result};
use crate::forward::{disk_oracle, FarFieldPattern, IncidentWave};
use crate::geometry::TrigShape;

/// Box of candidate circle centers and radii for the stage-1 search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub radius: [f64; 2],
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox {
            x: [-2.0, 2.0],
            y: [-2.0, 2.0],
            radius: [0.5, 3.0],
        }
    }
}

impl SearchBox {
    fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(ok(self.x) && ok(self.y) && ok(self.radius) && self.radius[0] > 0.0) {
            return Err(Error::Config(format!("invalid search box {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitConfig {
    pub search: SearchBox,
    pub alpha: f64,
    /// Maximum number of refinement steps in stage 2.
    pub refine_iters: usize,
    pub step_tol: f64,
    pub n_quad: usize,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            search: SearchBox::default(),
            alpha: super::DEFAULT_ALPHA,
            refine_iters: 10,
            step_tol: 1e-6,
            n_quad: crate::forward::DEFAULT_N_QUAD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub shape: TrigShape,
    pub circle_center: [f64; 2],
    pub circle_radius: f64,
    /// `||F(circle) - data||_2` after stage 1.
    pub circle_residual: f64,
    pub rows: Vec<TraceRow>,
}

fn weighted_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits a degree-1 starting shape to the lowest-frequency pattern.
pub fn initial_guess(
    data: &FarFieldPattern,
    theta: [f64; 2],
    cfg: &InitConfig,
) -> Result<InitialGuess> {
    cfg.search.validate()?;
    let wave = IncidentWave::new(data.k, theta)?;
    let target = data.to_weighted_real();
    let data_norm = weighted_norm(&target);

    let objective = |p: &[f64]| -> f64 {
        if !(p[2] > 0.0) {
            return f64::INFINITY;
        }
        match disk_oracle(p[2], [p[0], p[1]], &wave, &data.obs_dirs) {
            Ok(f) => f
                .to_weighted_real()
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
            Err(_) => f64::INFINITY,
        }
    };

    let b = cfg.search;
    let mid = |r: [f64; 2]| 0.5 * (r[0] + r[1]);
    let span = |r: [f64; 2]| ((r[1] - r[0]) / 4.0).max(1e-3);
    let steps = [span(b.x), span(b.y), span(b.radius)];
    let rho0 = mid(b.radius);
    let mut starts = vec![[mid(b.x), mid(b.y), rho0]];
    for &x in &[b.x[0], mid(b.x), b.x[1]] {
        for &y in &[b.y[0], mid(b.y), b.y[1]] {
            if [x, y] != [mid(b.x), mid(b.y)] {
                starts.push([x, y, rho0]);
            }
        }
    }
    let ftol = 1e-14 * data_norm * data_norm;
    let best = starts
        .iter()
        .map(|s| nelder_mead(objective, s, &steps, ftol, 1e-9, 4000))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");

    let residual = best.value.sqrt();
    let limit = 0.9 * data_norm;
    if !(residual <= limit) || data_norm == 0.0 {
        return Err(Error::InitFailure { residual, limit });
    }
    let center = [best.x[0], best.x[1]];
    let radius = best.x[2];

    let mut shape = TrigShape::circle(center, radius)?;
    let mut rows = Vec::new();
    for j in 0..cfg.refine_iters {
        let (next, mut r) =
            newton_at_frequency(&shape, theta, data, 1, cfg.alpha, 1, cfg.n_quad, 0)
                .map_err(|f| f.error)?;
        shape = next;
        let small = r.last().is_some_and(|row| row.step_norm < cfg.step_tol);
        for row in &mut r {
            row.iteration = j;
        }
        rows.extend(r);
        if small {
            break;
        }
    }
    if shape.degree() < 1 {
        shape = shape.with_radial(shape.radial().padded(1))?;
    }
    Ok(InitialGuess {
        shape,
        circle_center: center,
        circle_radius: radius,
        circle_residual: residual,
        rows,
    })
}
