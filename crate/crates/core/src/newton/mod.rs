//! Projected recursive Newton method over a frequency grid.
//!
//! At every wavenumber `k_{n+1}` the current shape is refined by `J`
//! Tikhonov-regularized Gauss-Newton steps restricted to the trigonometric
//! subspace of degree `M_{n+1}`; the result seeds the next wavenumber.

mod init;
mod simplex;

pub use init::{initial_guess, InitConfig, InitialGuess, SearchBox};
pub use simplex::{nelder_mead, SimplexResult};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{FarFieldPattern, IncidentWave};
use crate::geometry::{SubspaceSchedule, TrigCoefficients, TrigShape};
use crate::jacobian::{linearize, JacobianMatrix};

/// Default regularization parameter.
pub const DEFAULT_ALPHA: f64 = 1e-2;
/// Default number of Newton iterations per wavenumber.
pub const DEFAULT_ITERATIONS: usize = 4;
/// Default cap on the subspace degree.
pub const DEFAULT_SUBSPACE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub alpha: f64,
    pub iterations: usize,
    pub schedule: SubspaceSchedule,
    pub n_quad: usize,
}

impl NewtonConfig {
    pub fn new(
        alpha: f64,
        iterations: usize,
        schedule: SubspaceSchedule,
        n_quad: usize,
    ) -> Result<Self> {
        let cfg = NewtonConfig {
            alpha,
            iterations,
            schedule,
            n_quad,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config(
                "at least one Newton iteration is required".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform grid `k_n = k_low + n (k_high - k_low) / N`, `n = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub k_low: f64,
    pub k_high: f64,
    pub intervals: usize,
}

impl FrequencyGrid {
    pub fn new(k_low: f64, k_high: f64, intervals: usize) -> Result<Self> {
        if !(k_low > 0.0 && k_high > k_low && k_high.is_finite()) {
            return Err(Error::Config(format!(
                "frequency grid needs 0 < k_low < k_high, got {k_low}, {k_high}"
            )));
        }
        if intervals == 0 {
            return Err(Error::Config("frequency grid needs N >= 1".into()));
        }
        Ok(FrequencyGrid {
            k_low,
            k_high,
            intervals,
        })
    }

    /// Grid with `count` wavenumbers, i.e. `N = count - 1`.
    pub fn with_count(k_low: f64, k_high: f64, count: usize) -> Result<Self> {
        Self::new(k_low, k_high, count.saturating_sub(1))
    }

    pub fn step(&self) -> f64 {
        (self.k_high - self.k_low) / self.intervals as f64
    }

    pub fn k(&self, n: usize) -> f64 {
        if n == self.intervals {
            self.k_high
        } else {
            self.k_low + n as f64 * self.step()
        }
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.k(n)).collect()
    }
}

/// Diagnostics of one executed Newton iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub freq_index: usize,
    pub k: f64,
    pub iteration: usize,
    pub degree: usize,
    pub alpha: f64,
    /// `||F(r^j, k) - u_m||_2`
    pub residual_norm: f64,
    /// `||Delta r^j||_X`
    pub step_norm: f64,
    pub sigma_min: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionTrace {
    pub rows: Vec<TraceRow>,
    /// `(n, r_n)` for every frequency index reached, starting with the seed.
    pub shapes: Vec<(usize, TrigShape)>,
}

impl ReconstructionTrace {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.shapes.is_empty()
    }

    pub fn final_shape(&self) -> Option<&TrigShape> {
        self.shapes.last().map(|(_, s)| s)
    }

    /// Appends `other`, dropping its seed entry when it repeats our last shape.
    pub fn extend(&mut self, other: ReconstructionTrace) {
        let mut shapes = other.shapes.into_iter().peekable();
        if let (Some(last), Some(first)) = (self.shapes.last(), shapes.peek()) {
            if last == first {
                shapes.next();
            }
        }
        self.shapes.extend(shapes);
        self.rows.extend(other.rows);
    }
}

/// Early termination with the last admissible iterate and the partial trace.
#[derive(Debug)]
pub struct Aborted {
    pub error: Error,
    pub last_shape: TrigShape,
    pub trace: ReconstructionTrace,
}

impl std::fmt::Display for Aborted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "reconstruction aborted: {}", self.error)
    }
}

impl std::error::Error for Aborted {}

pub type RunResult = std::result::Result<(TrigShape, ReconstructionTrace), Box<Aborted>>;

/// Solves `(alpha I + A^T A) z = -A^T b` by Cholesky.
pub fn tikhonov_solve(a: &DMatrix<f64>, b: &[f64], alpha: f64) -> Result<DVector<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let at = a.transpose();
    let mut normal = &at * a;
    for i in 0..normal.nrows() {
        normal[(i, i)] += alpha;
    }
    let rhs = -(at * DVector::from_column_slice(b));
    let chol = normal.cholesky().ok_or(Error::NotSpd)?;
    Ok(chol.solve(&rhs))
}

/// Regularized Gauss-Newton increment
/// `-(alpha I + J* J)^{-1} J* residual` as trigonometric coefficients.
pub fn tikhonov_step(j: &JacobianMatrix, residual: &[f64], alpha: f64) -> Result<TrigCoefficients> {
    let z = tikhonov_solve(j.matrix(), residual, alpha)?;
    Ok(j.from_orthonormal(&z))
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Weighted residual `F(r, k) - data` and the Jacobian of degree `degree`.
pub fn residual_and_jacobian(
    shape: &TrigShape,
    wave: &IncidentWave,
    data: &FarFieldPattern,
    degree: usize,
    n_quad: usize,
) -> Result<(Vec<f64>, JacobianMatrix)> {
    let (far, jac) = linearize(shape, wave, &data.obs_dirs, degree, n_quad)?;
    let residual = far
        .to_weighted_real()
        .iter()
        .zip(data.to_weighted_real())
        .map(|(a, b)| a - b)
        .collect();
    Ok((residual, jac))
}

/// Failure inside one frequency step with the last admissible iterate and
/// the rows executed so far.
#[derive(Debug)]
pub struct StageFailure {
    pub error: Error,
    pub last_shape: TrigShape,
    pub rows: Vec<TraceRow>,
}

pub type StageResult = std::result::Result<(TrigShape, Vec<TraceRow>), Box<StageFailure>>;

fn stage_failure(error: Error, last_shape: TrigShape, rows: Vec<TraceRow>) -> Box<StageFailure> {
    Box::new(StageFailure {
        error,
        last_shape,
        rows,
    })
}

/// `J` projected Newton iterations at one wavenumber.
///
/// `freq_index` only labels trace rows. On failure the error comes back with
/// the last admissible iterate and the rows executed so far.
#[allow(clippy::too_many_arguments)]
pub fn newton_at_frequency(
    r_in: &TrigShape,
    theta: [f64; 2],
    data: &FarFieldPattern,
    degree: usize,
    alpha: f64,
    iterations: usize,
    n_quad: usize,
    freq_index: usize,
) -> StageResult {
    let mut rows = Vec::with_capacity(iterations);
    let mut current = r_in.clone();
    let wave = match IncidentWave::new(data.k, theta) {
        Ok(w) => w,
        Err(e) => return Err(stage_failure(e, current, rows)),
    };
    for iteration in 0..iterations {
        let step =
            residual_and_jacobian(&current, &wave, data, degree, n_quad).and_then(|(res, jac)| {
                let delta = tikhonov_step(&jac, &res, alpha)?;
                Ok((res, jac, delta))
            });
        let (res, jac, delta) = match step {
            Ok(v) => v,
            Err(e) => return Err(stage_failure(e, current, rows)),
        };
        let delta = delta.project(degree);
        rows.push(TraceRow {
            freq_index,
            k: data.k,
            iteration,
            degree,
            alpha,
            residual_norm: euclid(&res),
            step_norm: delta.l2_norm(),
            sigma_min: jac.smallest_singular_value().ok(),
        });
        let updated = current.radial().padded(degree).add(&delta);
        match current.with_radial(updated.clone()) {
            Ok(next) => current = next,
            Err(_) => {
                let error = Error::PositivityLoss {
                    freq_index,
                    iteration,
                    min_radius: updated.min_on_grid(),
                };
                return Err(stage_failure(error, current, rows));
            }
        }
    }
    Ok((current, rows))
}

/// Runs the recursion on the index range `start..=end` of the grid, i.e.
/// Newton iterations at `k_{start+1}, ..., k_end`.
pub fn recursive_range(
    r_start: &TrigShape,
    theta: [f64; 2],
    dataset: &[FarFieldPattern],
    cfg: &NewtonConfig,
    start: usize,
    end: usize,
) -> RunResult {
    let mut trace = ReconstructionTrace {
        rows: Vec::new(),
        shapes: vec![(start, r_start.clone())],
    };
    let abort = |error, last_shape, trace| {
        Box::new(Aborted {
            error,
            last_shape,
            trace,
        })
    };
    if let Err(e) = cfg.validate() {
        return Err(abort(e, r_start.clone(), trace));
    }
    if end >= dataset.len() || start > end {
        let e = Error::Config(format!(
            "index range {start}..={end} outside dataset of {} patterns",
            dataset.len()
        ));
        return Err(abort(e, r_start.clone(), trace));
    }
    let mut current = r_start.clone();
    for n in start..end {
        let degree = cfg.schedule.degree(n + 1);
        match newton_at_frequency(
            &current,
            theta,
            &dataset[n + 1],
            degree,
            cfg.alpha,
            cfg.iterations,
            cfg.n_quad,
            n + 1,
        ) {
            Ok((shape, rows)) => {
                trace.rows.extend(rows);
                trace.shapes.push((n + 1, shape.clone()));
                current = shape;
            }
            Err(failure) => {
                let StageFailure {
                    error,
                    last_shape,
                    rows,
                } = *failure;
                trace.rows.extend(rows);
                return Err(abort(error, last_shape, trace));
            }
        }
    }
    Ok((current, trace))
}

/// Recursive Newton reconstruction over the full grid starting from `r0`
/// at `k_0`; returns `r_N` and the trace.
pub fn recursive_reconstruct(
    r0: &TrigShape,
    grid: &FrequencyGrid,
    theta: [f64; 2],
    dataset: &[FarFieldPattern],
    cfg: &NewtonConfig,
) -> RunResult {
    if let Err(e) = check_dataset(grid, dataset) {
        return Err(Box::new(Aborted {
            error: e,
            last_shape: r0.clone(),
            trace: ReconstructionTrace::default(),
        }));
    }
    recursive_range(r0, theta, dataset, cfg, 0, grid.intervals)
}

pub(crate) fn check_dataset(grid: &FrequencyGrid, dataset: &[FarFieldPattern]) -> Result<()> {
    if dataset.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: dataset.len(),
        });
    }
    for (n, p) in dataset.iter().enumerate() {
        if (p.k - grid.k(n)).abs() > 1e-12 * grid.k(n) {
            return Err(Error::Config(format!(
                "pattern {n} has k = {} but the grid expects {}",
                p.k,
                grid.k(n)
            )));
        }
    }
    Ok(())
}
