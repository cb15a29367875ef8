//! Python bindings: shapes, forward solves, simulated datasets and
//! reconstructions.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use multifreq::forward::{self, IncidentWave, DEFAULT_N_QUAD, DEFAULT_OBS_DIRS};
use multifreq::geometry::{TrigCoefficients, TrigShape};
use multifreq::harness::{self, RunConfig, RunMode, SimulationSetup};
use multifreq::multilevel::LevelPartition;
use multifreq::newton::FrequencyGrid;
use multifreq::Error;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        4 => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn theta_or_default(theta: Option<(f64, f64)>) -> [f64; 2] {
    theta.map_or_else(harness::default_theta, |(x, y)| [x, y])
}

/// Star-shaped boundary `center + r(t) (cos t, sin t)` with a
/// trigonometric polynomial `r`.
#[pyclass(name = "TrigShape", module = "pymultifreq", from_py_object)]
#[derive(Clone)]
pub struct PyTrigShape {
    inner: TrigShape,
}

#[pymethods]
impl PyTrigShape {
    #[new]
    #[pyo3(signature = (a0, cos, sin, center = (0.0, 0.0)))]
    fn new(a0: f64, cos: Vec<f64>, sin: Vec<f64>, center: (f64, f64)) -> PyResult<Self> {
        let radial = TrigCoefficients::new(a0, cos, sin).map_err(to_py)?;
        let inner = TrigShape::new([center.0, center.1], radial).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (radius, center = (0.0, 0.0)))]
    fn circle(radius: f64, center: (f64, f64)) -> PyResult<Self> {
        let inner = TrigShape::circle([center.0, center.1], radius).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn flower(c1: f64, c2: f64, petals: usize) -> PyResult<Self> {
        let inner = TrigShape::flower(c1, c2, petals).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn center(&self) -> (f64, f64) {
        let c = self.inner.center();
        (c[0], c[1])
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn a0(&self) -> f64 {
        self.inner.radial().a0
    }

    #[getter]
    fn cos(&self) -> Vec<f64> {
        self.inner.radial().cos_coeffs.clone()
    }

    #[getter]
    fn sin(&self) -> Vec<f64> {
        self.inner.radial().sin_coeffs.clone()
    }

    fn radius(&self, t: f64) -> f64 {
        self.inner.eval_radius(t)
    }

    /// Relative L2 error of `other` measured against this shape.
    fn relative_error(&self, other: &PyTrigShape) -> f64 {
        self.inner.relative_error(&other.inner)
    }

    #[pyo3(signature = (other, theta = None))]
    fn illuminated_error(&self, other: &PyTrigShape, theta: Option<(f64, f64)>) -> f64 {
        self.inner
            .illuminated_error(&other.inner, theta_or_default(theta))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: TrigShape =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        let c = self.inner.center();
        format!(
            "TrigShape(degree={}, a0={}, center=({}, {}))",
            self.inner.degree(),
            self.inner.radial().a0,
            c[0],
            c[1]
        )
    }
}

/// Far field of a sound-soft obstacle on `n_obs` uniform directions.
#[pyfunction]
#[pyo3(signature = (shape, k, theta = None, n_obs = DEFAULT_OBS_DIRS, n_quad = DEFAULT_N_QUAD))]
fn far_field(
    py: Python<'_>,
    shape: &PyTrigShape,
    k: f64,
    theta: Option<(f64, f64)>,
    n_obs: usize,
    n_quad: usize,
) -> PyResult<Vec<Complex64>> {
    let wave = IncidentWave::new(k, theta_or_default(theta)).map_err(to_py)?;
    let dirs = forward::uniform_directions(n_obs);
    let shape = shape.inner.clone();
    py.detach(|| forward::solve_scattering(&shape, &wave, &dirs, n_quad))
        .map(|p| p.values)
        .map_err(to_py)
}

/// Series solution for a disk of the given radius and center.
#[pyfunction]
#[pyo3(signature = (radius, k, theta = None, n_obs = DEFAULT_OBS_DIRS, center = (0.0, 0.0)))]
fn disk_far_field(
    radius: f64,
    k: f64,
    theta: Option<(f64, f64)>,
    n_obs: usize,
    center: (f64, f64),
) -> PyResult<Vec<Complex64>> {
    let wave = IncidentWave::new(k, theta_or_default(theta)).map_err(to_py)?;
    let dirs = forward::uniform_directions(n_obs);
    forward::disk_oracle(radius, [center.0, center.1], &wave, &dirs)
        .map(|p| p.values)
        .map_err(to_py)
}

/// Far-field patterns on a frequency grid with their metadata.
#[pyclass(name = "Dataset", module = "pymultifreq")]
pub struct PyDataset {
    inner: harness::Dataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let inner = harness::Dataset::read(&path).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(&path).map_err(to_py)
    }

    #[getter]
    fn wavenumbers(&self) -> Vec<f64> {
        self.inner.patterns.iter().map(|p| p.k).collect()
    }

    #[getter]
    fn patterns(&self) -> Vec<Vec<Complex64>> {
        self.inner
            .patterns
            .iter()
            .map(|p| p.values.clone())
            .collect()
    }

    #[getter]
    fn noise_level(&self) -> f64 {
        self.inner.metadata.noise_level
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.metadata.seed
    }

    #[getter]
    fn truth(&self) -> Option<PyTrigShape> {
        self.inner.truth().map(|s| PyTrigShape { inner: s.clone() })
    }

    fn __len__(&self) -> usize {
        self.inner.patterns.len()
    }
}

/// Simulates noisy data for `count` equispaced wavenumbers in
/// `[k_low, k_high]`.
#[pyfunction]
#[pyo3(signature = (
    shape, k_low = harness::DEFAULT_K_LOW, k_high = harness::DEFAULT_K_HIGH,
    count = harness::DEFAULT_WAVENUMBERS, noise = harness::DEFAULT_NOISE, seed = 0,
    theta = None, n_obs = DEFAULT_OBS_DIRS, n_quad = DEFAULT_N_QUAD
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    shape: &PyTrigShape,
    k_low: f64,
    k_high: f64,
    count: usize,
    noise: f64,
    seed: u64,
    theta: Option<(f64, f64)>,
    n_obs: usize,
    n_quad: usize,
) -> PyResult<PyDataset> {
    let grid = FrequencyGrid::with_count(k_low, k_high, count).map_err(to_py)?;
    let setup = SimulationSetup {
        theta: theta_or_default(theta),
        obs_count: n_obs,
        n_quad,
    };
    let shape = shape.inner.clone();
    let inner = py
        .detach(|| harness::simulate(&shape, &grid, &setup, noise, seed))
        .map_err(to_py)?;
    Ok(PyDataset { inner })
}

/// Outcome of a reconstruction; aborted runs keep their last iterate.
#[pyclass(name = "Reconstruction", module = "pymultifreq", get_all)]
pub struct PyReconstruction {
    shape: PyTrigShape,
    initial: PyTrigShape,
    completed: bool,
    error: Option<String>,
    relative_error: Option<f64>,
    illuminated_error: Option<f64>,
    /// `(frequency index, k, iteration, degree, alpha, residual, step)` per
    /// Newton iteration.
    iterations: Vec<(usize, f64, usize, usize, f64, f64, f64)>,
}

/// Initial guess followed by the recursive (`multilevel=False`) or
/// multi-level Newton method.
#[pyfunction]
#[pyo3(signature = (dataset, alpha = None, iterations = None, multilevel = false, n_quad = None))]
fn reconstruct(
    py: Python<'_>,
    dataset: &PyDataset,
    alpha: Option<f64>,
    iterations: Option<usize>,
    multilevel: bool,
    n_quad: Option<usize>,
) -> PyResult<PyReconstruction> {
    let mut cfg = RunConfig {
        mode: if multilevel {
            RunMode::Multilevel
        } else {
            RunMode::Reconstruct
        },
        n_quad,
        ..RunConfig::default()
    };
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    if let Some(j) = iterations {
        cfg.iterations = j;
        if multilevel {
            let grid = dataset.inner.grid();
            cfg.partition = Some(
                LevelPartition::midpoint(&grid, [4.0 * cfg.alpha, cfg.alpha], [j, j])
                    .map_err(to_py)?,
            );
        }
    }
    let ds = &dataset.inner;
    let out = py
        .detach(|| harness::reconstruct_dataset(ds, &cfg))
        .map_err(to_py)?;
    let truth = ds.truth();
    Ok(PyReconstruction {
        relative_error: truth.map(|t| t.relative_error(&out.shape)),
        illuminated_error: truth.map(|t| t.illuminated_error(&out.shape, ds.theta())),
        completed: out.failure.is_none(),
        error: out.failure.map(|e| e.to_string()),
        iterations: out
            .trace
            .rows
            .iter()
            .map(|r| {
                (
                    r.freq_index,
                    r.k,
                    r.iteration,
                    r.degree,
                    r.alpha,
                    r.residual_norm,
                    r.step_norm,
                )
            })
            .collect(),
        initial: PyTrigShape {
            inner: out.initial.shape,
        },
        shape: PyTrigShape { inner: out.shape },
    })
}

#[pymodule]
fn pymultifreq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrigShape>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyReconstruction>()?;
    m.add_function(wrap_pyfunction!(far_field, m)?)?;
    m.add_function(wrap_pyfunction!(disk_far_field, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    Ok(())
}
