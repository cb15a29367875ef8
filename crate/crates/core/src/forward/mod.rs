//! Sound-soft exterior Helmholtz scattering by a star-shaped obstacle.
//!
//! The scattered field is sought as a combined double/single layer potential
//! with coupling `eta = k`,
//!
//! ```text
//! u_s(x) = int_{dD} [ dPhi(x,y)/dnu(y) - i eta Phi(x,y) ] phi(y) ds(y),
//! ```
//!
//! which leads to the second-kind equation `(I + 2K - 2i eta S) phi = 2 f`
//! for Dirichlet data `f`. The logarithmic parts of the kernels are
//! integrated with the trigonometric product weights `R_j` and the smooth
//! remainder with the trapezoidal rule (Nystrom method on `2n` nodes).
//!
//! The same factorization also yields the normal derivative of the total
//! field: the direct formulation `(I + 2K' - 2i eta S) w = 2(du_i/dnu - i eta u_i)`
//! has the transposed matrix up to a diagonal similarity by the boundary
//! speeds.

mod diagnostics;
mod oracle;

pub use diagnostics::{l2_norm_sphere, optical_theorem_defect, trig_interpolate};
pub use oracle::{disk_normal_derivative, disk_oracle};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{TrigShape, MIN_SPEED};
use crate::linalg::{ComplexLu, ComplexMatrix};
use crate::specfun::bessel_jy01;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default number of quadrature nodes; resolves `k <= 8` for boundaries with
/// speeds up to about 4.5 to better than `1e-10`.
pub const DEFAULT_N_QUAD: usize = 256;
/// Default number of observation directions.
pub const DEFAULT_OBS_DIRS: usize = 16;

const UNIT_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `P` equispaced unit vectors `(cos 2 pi p / P, sin 2 pi p / P)`.
pub fn uniform_directions(count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|p| {
            let a = 2.0 * PI * p as f64 / count as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

fn check_unit(v: [f64; 2], what: &str) -> Result<()> {
    if ((v[0].hypot(v[1])) - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain(format!(
            "{what} must be a unit vector, got {v:?}"
        )));
    }
    Ok(())
}

/// Plane wave `exp(i k x . theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    k: f64,
    theta: [f64; 2],
}

impl IncidentWave {
    pub fn new(k: f64, theta: [f64; 2]) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        check_unit(theta, "incident direction")?;
        Ok(IncidentWave { k, theta })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn theta(&self) -> [f64; 2] {
        self.theta
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(k, self.theta)
    }

    pub fn value(&self, x: [f64; 2]) -> Complex64 {
        Complex64::from_polar(1.0, self.k * (x[0] * self.theta[0] + x[1] * self.theta[1]))
    }

    /// Normal derivative along the (not necessarily unit) vector `nu`.
    pub fn normal_derivative(&self, x: [f64; 2], nu: [f64; 2]) -> Complex64 {
        let dot = nu[0] * self.theta[0] + nu[1] * self.theta[1];
        c(0.0, self.k * dot) * self.value(x)
    }
}

/// Far-field samples `u_inf(x_hat_p)` for one wavenumber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldPattern {
    pub k: f64,
    pub obs_dirs: Vec<[f64; 2]>,
    pub values: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn new(k: f64, obs_dirs: Vec<[f64; 2]>, values: Vec<Complex64>) -> Result<Self> {
        if obs_dirs.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: obs_dirs.len(),
                got: values.len(),
            });
        }
        for d in &obs_dirs {
            check_unit(*d, "observation direction")?;
        }
        Ok(FarFieldPattern {
            k,
            obs_dirs,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete L2(S^1) norm with uniform weights `2 pi / P`.
    pub fn l2_norm(&self) -> f64 {
        l2_norm_sphere(&self.values)
    }

    /// Relative discrete L2 distance `||self - other|| / ||other||`.
    pub fn relative_distance(&self, other: &FarFieldPattern) -> f64 {
        let diff: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        l2_norm_sphere(&diff) / other.l2_norm()
    }

    /// Samples stacked as `(Re u, Im u)` and weighted by `sqrt(2 pi / P)`,
    /// so the Euclidean norm equals the discrete L2(S^1) norm.
    pub fn to_weighted_real(&self) -> Vec<f64> {
        stack_weighted(&self.values)
    }
}

pub(crate) fn stack_weighted(values: &[Complex64]) -> Vec<f64> {
    let w = (2.0 * PI / values.len() as f64).sqrt();
    values
        .iter()
        .map(|v| w * v.re)
        .chain(values.iter().map(|v| w * v.im))
        .collect()
}

/// Boundary tables at the nodes `t_i = pi i / n`, `i = 0..2n`.
#[derive(Debug, Clone)]
pub struct DiscretizedBoundary {
    pub nodes: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub speeds: Vec<f64>,
    /// Unit outward normals.
    pub normals: Vec<[f64; 2]>,
    pub(crate) second: Vec<[f64; 2]>,
    /// `r(t_i)`; used for the radial perturbation `h . nu = a r / |x'|`.
    pub(crate) radii: Vec<f64>,
}

impl DiscretizedBoundary {
    pub fn n_quad(&self) -> usize {
        self.nodes.len()
    }

    pub fn half(&self) -> usize {
        self.nodes.len() / 2
    }

    /// Unnormalized outward normal `(x2', -x1')` at node `j`.
    fn scaled_normal(&self, j: usize) -> [f64; 2] {
        [
            self.normals[j][0] * self.speeds[j],
            self.normals[j][1] * self.speeds[j],
        ]
    }
}

/// Smallest admissible node count for a boundary of degree `m`.
pub fn min_quadrature(degree: usize) -> usize {
    (8 * degree + 16).max(16)
}

pub fn discretize(shape: &TrigShape, n_quad: usize) -> Result<DiscretizedBoundary> {
    let required = min_quadrature(shape.degree());
    if !n_quad.is_multiple_of(2) || n_quad < required {
        return Err(Error::QuadratureTooCoarse {
            n_quad,
            required: required + required % 2,
        });
    }
    let half = n_quad / 2;
    let mut b = DiscretizedBoundary {
        nodes: Vec::with_capacity(n_quad),
        points: Vec::with_capacity(n_quad),
        speeds: Vec::with_capacity(n_quad),
        normals: Vec::with_capacity(n_quad),
        second: Vec::with_capacity(n_quad),
        radii: Vec::with_capacity(n_quad),
    };
    for i in 0..n_quad {
        let t = PI * i as f64 / half as f64;
        let jet = shape.eval_geometry(t);
        let speed = jet.speed();
        if !(speed >= MIN_SPEED) {
            return Err(Error::DegenerateBoundary { t, speed });
        }
        let n = jet.outward_normal();
        b.nodes.push(t);
        b.points.push(jet.point);
        b.speeds.push(speed);
        b.normals.push([n[0] / speed, n[1] / speed]);
        b.second.push(jet.d2);
        b.radii.push(jet.radius);
    }
    Ok(b)
}

/// Product-quadrature weights `R_j` for `ln(4 sin^2((t - tau)/2))`, indexed
/// by `|i - j|` on `2n` nodes.
pub fn log_weights(half: usize) -> Vec<f64> {
    let n = half as f64;
    (0..2 * half)
        .map(|j| {
            let s: f64 = (1..half)
                .map(|m| (m as f64 * j as f64 * PI / n).cos() / m as f64)
                .sum();
            let alt = if j % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * PI / n * s - PI / (n * n) * alt
        })
        .collect()
}

fn log_sin2(dt: f64) -> f64 {
    let s = (0.5 * dt).sin();
    (4.0 * s * s).ln()
}

/// Factorized combined-field operator for one `(shape, k)`.
#[derive(Debug, Clone)]
pub struct ForwardSolver {
    boundary: DiscretizedBoundary,
    k: f64,
    eta: f64,
    lu: ComplexLu,
}

impl ForwardSolver {
    pub fn new(shape: &TrigShape, k: f64, n_quad: usize) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        let boundary = discretize(shape, n_quad)?;
        let matrix = assemble_combined_field(&boundary, k, k)?;
        let lu = ComplexLu::factor(matrix)?;
        Ok(ForwardSolver {
            boundary,
            k,
            eta: k,
            lu,
        })
    }

    pub fn boundary(&self) -> &DiscretizedBoundary {
        &self.boundary
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Density of the combined-field potential whose boundary trace is `data`.
    pub fn solve_dirichlet(&self, data: &[Complex64]) -> Result<Vec<Complex64>> {
        let rhs: Vec<Complex64> = data.iter().map(|v| 2.0 * v).collect();
        self.lu.solve(&rhs)
    }

    /// Density of the scattered field for a plane wave.
    pub fn scattering_density(&self, wave: &IncidentWave) -> Result<Vec<Complex64>> {
        let data: Vec<Complex64> = self
            .boundary
            .points
            .iter()
            .map(|&x| -wave.value(x))
            .collect();
        self.solve_dirichlet(&data)
    }

    /// Far field of the combined-field potential with density `density`.
    pub fn far_field(&self, density: &[Complex64], obs_dirs: &[[f64; 2]]) -> Vec<Complex64> {
        let b = &self.boundary;
        let gamma = Complex64::from_polar(1.0, -PI / 4.0) / (8.0 * PI * self.k).sqrt();
        let h = PI / b.half() as f64;
        obs_dirs
            .iter()
            .map(|d| {
                let s: Complex64 = (0..b.n_quad())
                    .map(|j| {
                        let nj = b.scaled_normal(j);
                        let weight =
                            self.k * (nj[0] * d[0] + nj[1] * d[1]) + self.eta * b.speeds[j];
                        let phase = -self.k * (d[0] * b.points[j][0] + d[1] * b.points[j][1]);
                        density[j] * Complex64::from_polar(weight, phase)
                    })
                    .sum();
                gamma * h * s
            })
            .collect()
    }

    /// Normal derivative `du/dnu` of the total field on the nodes.
    pub fn total_normal_derivative(&self, wave: &IncidentWave) -> Result<Vec<Complex64>> {
        let b = &self.boundary;
        // A' = D^{-1} A^T D with D = diag(speeds): solve A^T (D w) = D rhs.
        let rhs: Vec<Complex64> = (0..b.n_quad())
            .map(|j| {
                let x = b.points[j];
                let g = wave.normal_derivative(x, b.normals[j]) - c(0.0, self.eta) * wave.value(x);
                2.0 * b.speeds[j] * g
            })
            .collect();
        let dw = self.lu.solve_transpose(&rhs)?;
        Ok(dw.iter().zip(&b.speeds).map(|(v, s)| v / s).collect())
    }

    /// Far field from the normal derivative of the total field:
    /// `u_inf = -e^{i pi/4}/sqrt(8 pi k) int e^{-ik x_hat . y} du/dnu ds`.
    pub fn far_field_from_normal_derivative(
        &self,
        dudn: &[Complex64],
        obs_dirs: &[[f64; 2]],
    ) -> Vec<Complex64> {
        let b = &self.boundary;
        let gamma = -Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * self.k).sqrt();
        let h = PI / b.half() as f64;
        obs_dirs
            .iter()
            .map(|d| {
                let s: Complex64 = (0..b.n_quad())
                    .map(|j| {
                        let phase = -self.k * (d[0] * b.points[j][0] + d[1] * b.points[j][1]);
                        dudn[j] * Complex64::from_polar(b.speeds[j], phase)
                    })
                    .sum();
                gamma * h * s
            })
            .collect()
    }
}

/// Nystrom matrix of `I + 2K - 2i eta S`.
fn assemble_combined_field(b: &DiscretizedBoundary, k: f64, eta: f64) -> Result<ComplexMatrix> {
    let n2 = b.n_quad();
    let half = b.half();
    let weights = log_weights(half);
    let h = PI / half as f64;
    let ieta = c(0.0, eta);
    let mut a = ComplexMatrix::zeros(n2);
    let rows: Vec<Result<Vec<Complex64>>> = (0..n2)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![c(0.0, 0.0); n2];
            let xi = b.points[i];
            for j in 0..n2 {
                let sj = b.speeds[j];
                let (k1, k2) = if i == j {
                    let nj = b.scaled_normal(i);
                    let l2 =
                        (nj[0] * b.second[i][0] + nj[1] * b.second[i][1]) / (2.0 * PI * sj * sj);
                    let m1 = -sj / (2.0 * PI);
                    let m2 = c(-EULER_GAMMA / PI - (0.5 * k * sj).ln() / PI, 0.5) * sj;
                    (-ieta * m1, l2 - ieta * m2)
                } else {
                    let xj = b.points[j];
                    let d = [xi[0] - xj[0], xi[1] - xj[1]];
                    let r = d[0].hypot(d[1]);
                    let [j0, j1, y0, y1] = bessel_jy01(k * r)?;
                    let nj = b.scaled_normal(j);
                    let q = (nj[0] * d[0] + nj[1] * d[1]) / r;
                    // L = (ik/2) H1(kr) q, M = (i/2) H0(kr) |x'(tau)|
                    let l = c(0.0, 0.5 * k) * c(j1, y1) * q;
                    let l1 = -k / (2.0 * PI) * j1 * q;
                    let m = c(0.0, 0.5) * c(j0, y0) * sj;
                    let m1 = -j0 * sj / (2.0 * PI);
                    let lg = log_sin2(b.nodes[i] - b.nodes[j]);
                    let k1 = l1 - ieta * m1;
                    let k2 = (l - ieta * m) - k1 * lg;
                    (k1, k2)
                };
                let dist = i.abs_diff(j);
                row[j] = weights[dist] * k1 + h * k2;
            }
            row[i] += 1.0;
            Ok(row)
        })
        .collect();
    for (dst, row) in a.rows_mut().zip(rows) {
        dst.copy_from_slice(&row?);
    }
    Ok(a)
}

/// Far field of the scattered wave on `obs_dirs`.
pub fn solve_scattering(
    shape: &TrigShape,
    wave: &IncidentWave,
    obs_dirs: &[[f64; 2]],
    n_quad: usize,
) -> Result<FarFieldPattern> {
    let solver = ForwardSolver::new(shape, wave.k(), n_quad)?;
    let density = solver.scattering_density(wave)?;
    let values = solver.far_field(&density, obs_dirs);
    FarFieldPattern::new(wave.k(), obs_dirs.to_vec(), values)
}
