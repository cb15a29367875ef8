//! Run configuration, execution and the run directory layout
//! (`config.json`, `result.json`, `trace.json` and the report tables).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_json, write_json, write_report, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{SubspaceSchedule, TrigShape};
use crate::multilevel::{multilevel_reconstruct, LevelPartition, LevelSummary};
use crate::newton::{
    initial_guess, recursive_reconstruct, InitConfig, InitialGuess, NewtonConfig,
    ReconstructionTrace, DEFAULT_ALPHA, DEFAULT_ITERATIONS, DEFAULT_SUBSPACE_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Reconstruct,
    Multilevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mode: RunMode,
    pub dataset: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub alpha: f64,
    pub iterations: usize,
    pub subspace_cap: usize,
    /// Explicit degrees `M_0..M_N`; derived from the fitted circle when absent.
    pub schedule: Option<SubspaceSchedule>,
    /// Quadrature size; the dataset's own value when absent.
    pub n_quad: Option<usize>,
    pub init: InitConfig,
    /// Required by (and defaulted for) multilevel runs.
    pub partition: Option<LevelPartition>,
    pub report: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: RunMode::Reconstruct,
            dataset: None,
            output: None,
            alpha: DEFAULT_ALPHA,
            iterations: DEFAULT_ITERATIONS,
            subspace_cap: DEFAULT_SUBSPACE_CAP,
            schedule: None,
            n_quad: None,
            init: InitConfig::default(),
            partition: None,
            report: true,
        }
    }
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
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
        if self.subspace_cap == 0 {
            return Err(Error::Config("subspace cap must be at least 1".into()));
        }
        if let Some(p) = &self.partition {
            p.validate()?;
        }
        Ok(())
    }
}

/// Everything a reconstruction produced, including partial results of an
/// aborted run.
#[derive(Debug)]
pub struct RunOutcome {
    pub initial: InitialGuess,
    pub newton: NewtonConfig,
    pub shape: TrigShape,
    pub trace: ReconstructionTrace,
    pub levels: Vec<LevelSummary>,
    pub failure: Option<Error>,
}

/// Initial guess at `k_0` followed by the recursive or multi-level Newton
/// method on the whole grid.
pub fn reconstruct_dataset(dataset: &Dataset, cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    dataset.validate()?;
    let grid = dataset.grid();
    let theta = dataset.theta();
    let patterns = dataset.patterns()?;
    let n_quad = cfg.n_quad.unwrap_or(dataset.metadata.n_quad);
    let init_cfg = InitConfig {
        n_quad,
        ..cfg.init.clone()
    };
    let initial = initial_guess(&patterns[0], theta, &init_cfg)?;
    let schedule = match &cfg.schedule {
        Some(s) if s.len() != grid.len() => {
            return Err(Error::Config(format!(
                "schedule has {} degrees for {} wavenumbers",
                s.len(),
                grid.len()
            )))
        }
        Some(s) => s.clone(),
        None => SubspaceSchedule::from_wavenumbers(
            &grid.wavenumbers(),
            initial.circle_radius,
            cfg.subspace_cap,
        )?,
    };
    let r0 = initial
        .shape
        .with_radial(initial.shape.radial().project(schedule.degree(0)))?;
    let newton = NewtonConfig::new(cfg.alpha, cfg.iterations, schedule, n_quad)?;

    let result = match cfg.mode {
        RunMode::Reconstruct => recursive_reconstruct(&r0, &grid, theta, &patterns, &newton)
            .map(|(s, t)| (s, t, vec![])),
        RunMode::Multilevel => {
            let partition = match &cfg.partition {
                Some(p) => p.clone(),
                None => LevelPartition::midpoint(&grid, [4.0 * cfg.alpha, cfg.alpha], [5, 4])?,
            };
            multilevel_reconstruct(&r0, &grid, theta, &patterns, &partition, &newton)
        }
    };
    Ok(match result {
        Ok((shape, trace, levels)) => RunOutcome {
            initial,
            newton,
            shape,
            trace,
            levels,
            failure: None,
        },
        Err(aborted) => RunOutcome {
            initial,
            newton,
            shape: aborted.last_shape,
            trace: aborted.trace,
            levels: vec![],
            failure: Some(aborted.error),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Aborted,
}

/// Contents of `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub status: RunStatus,
    pub error: Option<String>,
    pub exit_code: i32,
    pub dataset: Option<PathBuf>,
    pub initial: InitialGuess,
    pub newton: NewtonConfig,
    pub levels: Vec<LevelSummary>,
    pub final_shape: TrigShape,
    pub relative_error: Option<f64>,
    pub illuminated_error: Option<f64>,
}

/// Loads the dataset, runs the reconstruction and writes the run directory.
/// An aborted reconstruction is still written; its record carries the
/// failure and a nonzero exit code.
pub fn execute(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let data_path = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("run configuration has no dataset".into()))?;
    let out = cfg
        .output
        .as_ref()
        .ok_or_else(|| Error::Config("run configuration has no output directory".into()))?;
    let dataset = Dataset::read(data_path)?;
    let outcome = reconstruct_dataset(&dataset, cfg)?;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("config.json"), cfg)?;
    write_json(&out.join("trace.json"), &outcome.trace)?;
    let truth = dataset.truth();
    let record = RunRecord {
        status: if outcome.failure.is_none() {
            RunStatus::Completed
        } else {
            RunStatus::Aborted
        },
        error: outcome.failure.as_ref().map(|e| e.to_string()),
        exit_code: outcome.failure.as_ref().map_or(0, Error::exit_code),
        // absolute, so that `report` works from any directory
        dataset: Some(std::fs::canonicalize(data_path).unwrap_or_else(|_| data_path.clone())),
        initial: outcome.initial,
        newton: outcome.newton,
        levels: outcome.levels,
        relative_error: truth.map(|t| t.relative_error(&outcome.shape)),
        illuminated_error: truth.map(|t| t.illuminated_error(&outcome.shape, dataset.theta())),
        final_shape: outcome.shape,
    };
    write_json(&out.join("result.json"), &record)?;
    if cfg.report && !outcome.trace.rows.is_empty() {
        write_report(out, &super::report(&outcome.trace, Some(&dataset)))?;
    }
    Ok(record)
}

/// Reads `result.json` and `trace.json` back from a run directory.
pub fn load_run(dir: &Path) -> Result<(RunRecord, ReconstructionTrace)> {
    let record = read_json(&dir.join("result.json"))?;
    let trace = read_json(&dir.join("trace.json"))?;
    Ok((record, trace))
}
