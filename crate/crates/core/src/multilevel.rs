//! Multi-level Newton: the frequency grid is cut into consecutive levels,
//! each run with its own regularization parameter and iteration count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{FarFieldPattern, IncidentWave};
use crate::geometry::TrigShape;
use crate::newton::{
    check_dataset, recursive_range, residual_and_jacobian, Aborted, FrequencyGrid, NewtonConfig,
    ReconstructionTrace, RunResult,
};

/// Default `epsilon` for [`alpha_schedule`].
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Running minimum `s_1 = t_1`, `s_{m+1} = min(s_m, t_{m+1})`.
pub fn sigma_hat(sigma_tilde: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sigma_tilde.len());
    let mut current = f64::INFINITY;
    for &s in sigma_tilde {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!(
                "singular value estimates must be positive, got {s}"
            )));
        }
        current = current.min(s);
        out.push(current);
    }
    Ok(out)
}

/// `alpha_m = epsilon * sigma_m^2 / (3 - epsilon)`.
pub fn alpha_schedule(sigma_hat: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0 && epsilon < 3.0) {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, 3), got {epsilon}"
        )));
    }
    if sigma_hat.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Domain("sigma_hat must be nonincreasing".into()));
    }
    Ok(sigma_hat
        .iter()
        .map(|s| epsilon * s * s / (3.0 - epsilon))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaPolicy {
    /// One value per level, nonincreasing.
    Fixed { alphas: Vec<f64> },
    /// `alpha_m` from the smallest singular value of the Jacobian at the
    /// current iterate and the level's first frequency.
    SigmaSchedule { epsilon: f64 },
}

/// Level `m` covers frequency indices `boundaries[m]..=boundaries[m + 1]`;
/// consecutive levels share their boundary index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPartition {
    pub boundaries: Vec<usize>,
    pub alpha: AlphaPolicy,
    pub iterations: Vec<usize>,
}

impl LevelPartition {
    pub fn new(boundaries: Vec<usize>, alpha: AlphaPolicy, iterations: Vec<usize>) -> Result<Self> {
        let p = LevelPartition {
            boundaries,
            alpha,
            iterations,
        };
        p.validate()?;
        Ok(p)
    }

    /// A single level spanning the whole grid.
    pub fn single(grid: &FrequencyGrid, alpha: f64, iterations: usize) -> Result<Self> {
        Self::new(
            vec![0, grid.intervals],
            AlphaPolicy::Fixed {
                alphas: vec![alpha],
            },
            vec![iterations],
        )
    }

    /// Two levels cut at the middle of the grid.
    pub fn midpoint(
        grid: &FrequencyGrid,
        alphas: [f64; 2],
        iterations: [usize; 2],
    ) -> Result<Self> {
        let mid = (grid.intervals / 2).max(1);
        if mid >= grid.intervals {
            return Self::single(grid, alphas[1], iterations[1]);
        }
        Self::new(
            vec![0, mid, grid.intervals],
            AlphaPolicy::Fixed {
                alphas: alphas.to_vec(),
            },
            iterations.to_vec(),
        )
    }

    /// First frequency step on its own with the larger parameter, then the
    /// rest of the grid.
    pub fn first_step(
        grid: &FrequencyGrid,
        alphas: [f64; 2],
        iterations: [usize; 2],
    ) -> Result<Self> {
        if grid.intervals == 1 {
            return Self::single(grid, alphas[0], iterations[0]);
        }
        Self::new(
            vec![0, 1, grid.intervals],
            AlphaPolicy::Fixed {
                alphas: alphas.to_vec(),
            },
            iterations.to_vec(),
        )
    }

    pub fn levels(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let levels = self.levels();
        if levels == 0 || self.boundaries[0] != 0 {
            return Err(Error::Config(
                "level boundaries must start at 0 and define at least one level".into(),
            ));
        }
        if self.boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "level boundaries must be strictly increasing: {:?}",
                self.boundaries
            )));
        }
        if self.iterations.len() != levels || self.iterations.contains(&0) {
            return Err(Error::Config(format!(
                "need one iteration count >= 1 per level ({levels}), got {:?}",
                self.iterations
            )));
        }
        match &self.alpha {
            AlphaPolicy::Fixed { alphas } => {
                if alphas.len() != levels || alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(Error::Config(format!(
                        "need one positive alpha per level ({levels}), got {alphas:?}"
                    )));
                }
                if alphas.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::Config(format!(
                        "per-level alphas must be nonincreasing: {alphas:?}"
                    )));
                }
            }
            AlphaPolicy::SigmaSchedule { epsilon } => {
                if !(*epsilon > 0.0 && *epsilon < 3.0) {
                    return Err(Error::Config(format!(
                        "epsilon must lie in (0, 3), got {epsilon}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-level parameters actually used by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub start: usize,
    pub end: usize,
    pub alpha: f64,
    pub iterations: usize,
    pub sigma_tilde: Option<f64>,
    pub sigma_hat: Option<f64>,
}

/// Runs the levels in order, each seeded with the previous level's final
/// shape. `base` supplies the subspace schedule and quadrature size.
pub fn multilevel_reconstruct(
    r0: &TrigShape,
    grid: &FrequencyGrid,
    theta: [f64; 2],
    dataset: &[FarFieldPattern],
    partition: &LevelPartition,
    base: &NewtonConfig,
) -> std::result::Result<(TrigShape, ReconstructionTrace, Vec<LevelSummary>), Box<Aborted>> {
    let fail = |error, shape: &TrigShape, trace: ReconstructionTrace| {
        Box::new(Aborted {
            error,
            last_shape: shape.clone(),
            trace,
        })
    };
    if let Err(e) = partition
        .validate()
        .and_then(|_| check_dataset(grid, dataset))
        .and_then(|_| match partition.boundaries.last() {
            Some(&n) if n == grid.intervals => Ok(()),
            _ => Err(Error::Config(format!(
                "level boundaries {:?} do not end at N = {}",
                partition.boundaries, grid.intervals
            ))),
        })
    {
        return Err(fail(e, r0, ReconstructionTrace::default()));
    }

    let mut current = r0.clone();
    let mut trace = ReconstructionTrace::default();
    let mut summaries = Vec::with_capacity(partition.levels());
    let mut running_sigma = f64::INFINITY;
    for m in 0..partition.levels() {
        let (start, end) = (partition.boundaries[m], partition.boundaries[m + 1]);
        let (alpha, sigma_tilde) = match &partition.alpha {
            AlphaPolicy::Fixed { alphas } => (alphas[m], None),
            AlphaPolicy::SigmaSchedule { epsilon } => {
                let first = start + 1;
                let sigma = IncidentWave::new(dataset[first].k, theta)
                    .and_then(|w| {
                        residual_and_jacobian(
                            &current,
                            &w,
                            &dataset[first],
                            base.schedule.degree(first),
                            base.n_quad,
                        )
                    })
                    .and_then(|(_, jac)| jac.smallest_singular_value());
                let step = sigma.and_then(|s| {
                    let hat = running_sigma.min(s);
                    Ok((s, hat, alpha_schedule(&[hat], *epsilon)?[0]))
                });
                match step {
                    Ok((s, hat, a)) => {
                        running_sigma = hat;
                        (a, Some(s))
                    }
                    Err(e) => return Err(fail(e, &current, trace)),
                }
            }
        };
        let cfg = NewtonConfig {
            alpha,
            iterations: partition.iterations[m],
            ..base.clone()
        };
        match recursive_range(&current, theta, dataset, &cfg, start, end) {
            Ok((shape, level_trace)) => {
                trace.extend(level_trace);
                current = shape;
            }
            Err(aborted) => {
                let Aborted {
                    error,
                    last_shape,
                    trace: level_trace,
                } = *aborted;
                trace.extend(level_trace);
                return Err(fail(error, &last_shape, trace));
            }
        }
        summaries.push(LevelSummary {
            start,
            end,
            alpha,
            iterations: partition.iterations[m],
            sigma_tilde,
            sigma_hat: sigma_tilde.map(|_| running_sigma),
        });
    }
    Ok((current, trace, summaries))
}

/// Convenience wrapper returning only the shape and trace.
pub fn multilevel_run(
    r0: &TrigShape,
    grid: &FrequencyGrid,
    theta: [f64; 2],
    dataset: &[FarFieldPattern],
    partition: &LevelPartition,
    base: &NewtonConfig,
) -> RunResult {
    multilevel_reconstruct(r0, grid, theta, dataset, partition, base).map(|(s, t, _)| (s, t))
}
