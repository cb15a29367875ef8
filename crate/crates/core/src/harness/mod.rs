//! Simulated datasets, run orchestration and the files around them.

mod plot;
mod report;
mod run;

pub use plot::{plot, render_svg, PLOT_SAMPLES};
pub use report::{report, write_report, ReportTables};
pub use run::{
    execute, load_run, reconstruct_dataset, RunConfig, RunMode, RunOutcome, RunRecord, RunStatus,
};

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{solve_scattering, uniform_directions, FarFieldPattern, IncidentWave};
use crate::geometry::TrigShape;
use crate::multilevel::{AlphaPolicy, LevelPartition};
use crate::newton::FrequencyGrid;

/// Identifier of the noise generator stored with every dataset.
pub const RNG_ALGORITHM: &str =
    "rand_chacha::ChaCha20Rng(seed_from_u64)+rand_distr::StandardNormal";

pub const DEFAULT_K_LOW: f64 = 0.5;
pub const DEFAULT_K_HIGH: f64 = 8.0;
pub const DEFAULT_WAVENUMBERS: usize = 12;
pub const DEFAULT_NOISE: f64 = 0.05;

pub fn default_theta() -> [f64; 2] {
    [-0.5, 3f64.sqrt() / 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub grid: FrequencyGrid,
    pub theta: [f64; 2],
    pub obs_dirs: Vec<[f64; 2]>,
    pub noise_level: f64,
    pub rng: String,
    pub seed: u64,
    pub n_quad: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TrigShape>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub k: f64,
    pub values: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean: Option<Vec<Complex64>>,
}

/// Measured far fields on a frequency grid plus the simulation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub metadata: DatasetMetadata,
    pub patterns: Vec<PatternRecord>,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        let m = &self.metadata;
        if self.patterns.len() != m.grid.len() {
            return Err(Error::Config(format!(
                "dataset has {} patterns for a grid of {}",
                self.patterns.len(),
                m.grid.len()
            )));
        }
        if (m.theta[0].hypot(m.theta[1]) - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "incident direction {:?} is not a unit vector",
                m.theta
            )));
        }
        if !(0.0..1.0).contains(&m.noise_level) {
            return Err(Error::Config(format!(
                "noise level {} outside [0, 1)",
                m.noise_level
            )));
        }
        for (n, p) in self.patterns.iter().enumerate() {
            if (p.k - m.grid.k(n)).abs() > 1e-12 * p.k.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "pattern {n}: k = {} off grid ({})",
                    p.k,
                    m.grid.k(n)
                )));
            }
            let len_ok = |v: &Vec<Complex64>| v.len() == m.obs_dirs.len();
            if !len_ok(&p.values) || p.clean.as_ref().is_some_and(|c| !len_ok(c)) {
                return Err(Error::Config(format!(
                    "pattern {n}: expected {} values",
                    m.obs_dirs.len()
                )));
            }
        }
        Ok(())
    }

    pub fn theta(&self) -> [f64; 2] {
        self.metadata.theta
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.metadata.grid
    }

    pub fn truth(&self) -> Option<&TrigShape> {
        self.metadata.truth.as_ref()
    }

    /// Noisy patterns, one per grid point.
    pub fn patterns(&self) -> Result<Vec<FarFieldPattern>> {
        self.patterns
            .iter()
            .map(|p| FarFieldPattern::new(p.k, self.metadata.obs_dirs.clone(), p.values.clone()))
            .collect()
    }

    pub fn clean_patterns(&self) -> Option<Result<Vec<FarFieldPattern>>> {
        self.patterns
            .iter()
            .map(|p| p.clean.clone())
            .collect::<Option<Vec<_>>>()
            .map(|cl| {
                cl.into_iter()
                    .zip(&self.patterns)
                    .map(|(v, p)| FarFieldPattern::new(p.k, self.metadata.obs_dirs.clone(), v))
                    .collect()
            })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ds: Dataset = serde_json::from_str(&text)?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Wave and sampling parameters of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub theta: [f64; 2],
    pub obs_count: usize,
    pub n_quad: usize,
}

impl Default for SimulationSetup {
    fn default() -> Self {
        SimulationSetup {
            theta: default_theta(),
            obs_count: crate::forward::DEFAULT_OBS_DIRS,
            n_quad: crate::forward::DEFAULT_N_QUAD,
        }
    }
}

/// `u_m = u + delta (||u|| / ||g||) g` with `g` standard complex Gaussian.
pub fn add_noise(clean: &[Complex64], delta: f64, rng: &mut ChaCha20Rng) -> Vec<Complex64> {
    let g: Vec<Complex64> = clean
        .iter()
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    if delta == 0.0 {
        return clean.to_vec();
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (nu, ng) = (norm(clean), norm(&g));
    if ng == 0.0 {
        return clean.to_vec();
    }
    let scale = delta * nu / ng;
    clean.iter().zip(&g).map(|(u, e)| u + e * scale).collect()
}

/// Solves the forward problem at every grid point and adds seeded noise.
pub fn simulate(
    truth: &TrigShape,
    grid: &FrequencyGrid,
    setup: &SimulationSetup,
    noise_level: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(0.0..1.0).contains(&noise_level) {
        return Err(Error::Config(format!(
            "noise level {noise_level} outside [0, 1)"
        )));
    }
    if setup.obs_count == 0 {
        return Err(Error::Config(
            "need at least one observation direction".into(),
        ));
    }
    let dirs = uniform_directions(setup.obs_count);
    let wave = IncidentWave::new(grid.k_low, setup.theta)?;
    let clean: Vec<FarFieldPattern> = grid
        .wavenumbers()
        .par_iter()
        .map(|&k| solve_scattering(truth, &wave.with_k(k)?, &dirs, setup.n_quad))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let patterns = clean
        .into_iter()
        .map(|p| PatternRecord {
            k: p.k,
            values: add_noise(&p.values, noise_level, &mut rng),
            clean: Some(p.values),
        })
        .collect();
    Ok(Dataset {
        metadata: DatasetMetadata {
            grid: *grid,
            theta: wave.theta(),
            obs_dirs: dirs,
            noise_level,
            rng: RNG_ALGORITHM.to_string(),
            seed,
            n_quad: setup.n_quad,
            truth: Some(truth.clone()),
        },
        patterns,
    })
}

/// Parses `flower:c1,c2,petals`, `circle:R[,cx,cy]` or a path to a shape
/// JSON file.
pub fn parse_shape(spec: &str) -> Result<TrigShape> {
    let numbers = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {v:?} in shape spec {spec:?}")))
            })
            .collect()
    };
    if let Some(rest) = spec.strip_prefix("flower:") {
        let v = numbers(rest)?;
        if v.len() != 3 || v[2] < 0.0 || v[2].fract() != 0.0 {
            return Err(Error::Config(format!(
                "flower needs c1,c2,petals (integer), got {spec:?}"
            )));
        }
        return TrigShape::flower(v[0], v[1], v[2] as usize);
    }
    if let Some(rest) = spec.strip_prefix("circle:") {
        let v = numbers(rest)?;
        return match v.as_slice() {
            [r] => TrigShape::circle([0.0, 0.0], *r),
            [r, x, y] => TrigShape::circle([*x, *y], *r),
            _ => Err(Error::Config(format!(
                "circle needs R or R,cx,cy, got {spec:?}"
            ))),
        };
    }
    let path = Path::new(spec);
    if !path.exists() && spec.contains(':') {
        return Err(Error::Config(format!("unknown shape kind in {spec:?}")));
    }
    read_json(path)
}

/// Parses `kl,kh,N`.
pub fn parse_grid(spec: &str) -> Result<FrequencyGrid> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("grid must be kl,kh,N, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let kl: f64 = parts[0].parse().map_err(|_| bad())?;
    let kh: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    FrequencyGrid::new(kl, kh, n)
}

/// Level partition from `first-step`, `midpoint`, `single`, a list
/// `END:ALPHA:J,...` (`ALPHA` may be `auto` on every level for the
/// singular-value schedule) or a path to a partition JSON file.
pub fn parse_levels(
    spec: &str,
    grid: &FrequencyGrid,
    alpha: f64,
    epsilon: f64,
) -> Result<LevelPartition> {
    match spec {
        "first-step" => return LevelPartition::first_step(grid, [4.0 * alpha, alpha], [5, 4]),
        "midpoint" => return LevelPartition::midpoint(grid, [4.0 * alpha, alpha], [5, 4]),
        "single" => return LevelPartition::single(grid, alpha, crate::newton::DEFAULT_ITERATIONS),
        _ => {}
    }
    if !spec.contains(':') {
        return read_json(Path::new(spec));
    }
    let bad = |item: &str| Error::Config(format!("level {item:?} is not END:ALPHA:J"));
    let mut boundaries = vec![0];
    let mut alphas = Vec::new();
    let mut iterations = Vec::new();
    for item in spec.split(',') {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad(item));
        }
        boundaries.push(parts[0].parse::<usize>().map_err(|_| bad(item))?);
        alphas.push(match parts[1] {
            "auto" => None,
            a => Some(a.parse::<f64>().map_err(|_| bad(item))?),
        });
        iterations.push(parts[2].parse::<usize>().map_err(|_| bad(item))?);
    }
    let policy = if alphas.iter().all(Option::is_none) {
        AlphaPolicy::SigmaSchedule { epsilon }
    } else if alphas.iter().all(Option::is_some) {
        AlphaPolicy::Fixed {
            alphas: alphas.into_iter().flatten().collect(),
        }
    } else {
        return Err(Error::Config(
            "mixing auto and explicit level alphas is not supported".into(),
        ));
    };
    LevelPartition::new(boundaries, policy, iterations)
}
