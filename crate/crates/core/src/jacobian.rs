//! Domain derivative of the boundary-to-far-field map restricted to a
//! trigonometric subspace.
//!
//! For a radial perturbation `a(t)`, the far field of `u'` solving the
//! exterior Dirichlet problem with boundary data `-(h . nu) du/dnu`,
//! `h = a (cos t, sin t)`, is the directional derivative. All `2M + 1`
//! columns reuse the factorization of the forward operator.
//!
//! Matrices are stored in weighted coordinates: rows are far-field samples
//! stacked `(Re, Im)` and scaled by `sqrt(2 pi / P)`, columns correspond to
//! the orthonormalized basis `{1/sqrt(2 pi), cos mt / sqrt(pi), sin mt / sqrt(pi)}`.
//! Euclidean products in these coordinates are the L2 products of the
//! underlying spaces, so the transpose is the adjoint.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{stack_weighted, FarFieldPattern, ForwardSolver, IncidentWave};
use crate::geometry::{TrigCoefficients, TrigShape};

/// Relative threshold for declaring the Jacobian rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    k: f64,
    degree: usize,
    matrix: DMatrix<f64>,
}

impl JacobianMatrix {
    /// Wraps a matrix already expressed in weighted coordinates; the column
    /// count must be odd (`2M + 1`).
    pub fn from_matrix(k: f64, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.ncols().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: matrix.ncols() + 1,
                got: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite Jacobian entry".into()));
        }
        Ok(JacobianMatrix {
            k,
            degree: matrix.ncols() / 2,
            matrix,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn scaled(&self, s: f64) -> Self {
        JacobianMatrix {
            matrix: &self.matrix * s,
            ..self.clone()
        }
    }

    /// Orthonormal coordinates of `coeffs` (padded or truncated to the degree).
    pub fn to_orthonormal(&self, coeffs: &TrigCoefficients) -> DVector<f64> {
        let packed = coeffs.padded(self.degree).project(self.degree).to_packed();
        DVector::from_iterator(
            packed.len(),
            packed
                .iter()
                .enumerate()
                .map(|(i, v)| v * TrigCoefficients::basis_norm(i)),
        )
    }

    pub fn from_orthonormal(&self, z: &DVector<f64>) -> TrigCoefficients {
        let packed: Vec<f64> = z
            .iter()
            .enumerate()
            .map(|(i, v)| v / TrigCoefficients::basis_norm(i))
            .collect();
        TrigCoefficients::from_packed(&packed).expect("odd length by construction")
    }

    /// Weighted far-field vector of the derivative in direction `coeffs`.
    pub fn apply(&self, coeffs: &TrigCoefficients) -> Vec<f64> {
        (&self.matrix * self.to_orthonormal(coeffs))
            .iter()
            .copied()
            .collect()
    }

    /// Adjoint with respect to the L2[0, 2pi] and discrete L2(S^1) products.
    pub fn adjoint_apply(&self, residual: &[f64]) -> Result<TrigCoefficients> {
        if residual.len() != self.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.nrows(),
                got: residual.len(),
            });
        }
        let r = DVector::from_column_slice(residual);
        Ok(self.from_orthonormal(&(self.matrix.transpose() * r)))
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .matrix
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Smallest singular value; fails when it is below `1e-14 sigma_max` or
    /// when there are more columns than rows.
    pub fn smallest_singular_value(&self) -> Result<f64> {
        let s = self.singular_values();
        let sigma_max = s.first().copied().unwrap_or(0.0);
        let sigma_min = if self.ncols() > self.nrows() {
            0.0
        } else {
            s.last().copied().unwrap_or(0.0)
        };
        if !(sigma_min >= RANK_TOLERANCE * sigma_max) || sigma_max == 0.0 {
            return Err(Error::RankDeficient {
                sigma_min,
                sigma_max,
            });
        }
        Ok(sigma_min)
    }
}

/// Far field at `shape` together with the Jacobian of degree `degree`.
pub fn linearize(
    shape: &TrigShape,
    wave: &IncidentWave,
    obs_dirs: &[[f64; 2]],
    degree: usize,
    n_quad: usize,
) -> Result<(FarFieldPattern, JacobianMatrix)> {
    let solver = ForwardSolver::new(shape, wave.k(), n_quad)?;
    let density = solver.scattering_density(wave)?;
    let far = FarFieldPattern::new(
        wave.k(),
        obs_dirs.to_vec(),
        solver.far_field(&density, obs_dirs),
    )?;
    let dudn = solver.total_normal_derivative(wave)?;
    let b = solver.boundary();
    // -(h . nu) du/dnu without the basis factor a(t): h . nu = a r / |x'|
    let base: Vec<Complex64> = (0..b.n_quad())
        .map(|j| -dudn[j] * (b.radii[j] / b.speeds[j]))
        .collect();
    let ncols = 2 * degree + 1;
    let columns: Vec<Result<Vec<f64>>> = (0..ncols)
        .into_par_iter()
        .map(|idx| {
            let data: Vec<Complex64> = b
                .nodes
                .iter()
                .zip(&base)
                .map(|(&t, &g)| g * basis_function(idx, t))
                .collect();
            let dens = solver.solve_dirichlet(&data)?;
            let col = stack_weighted(&solver.far_field(&dens, obs_dirs));
            let scale = 1.0 / TrigCoefficients::basis_norm(idx);
            Ok(col.into_iter().map(|v| v * scale).collect())
        })
        .collect();
    let nrows = 2 * obs_dirs.len();
    let mut matrix = DMatrix::zeros(nrows, ncols);
    for (j, col) in columns.into_iter().enumerate() {
        matrix.set_column(j, &DVector::from_vec(col?));
    }
    Ok((far, JacobianMatrix::from_matrix(wave.k(), matrix)?))
}

pub fn assemble_jacobian(
    shape: &TrigShape,
    wave: &IncidentWave,
    obs_dirs: &[[f64; 2]],
    degree: usize,
    n_quad: usize,
) -> Result<JacobianMatrix> {
    Ok(linearize(shape, wave, obs_dirs, degree, n_quad)?.1)
}

/// Basis function at packed index `idx`: `1, cos t, sin t, cos 2t, ...`.
pub fn basis_function(idx: usize, t: f64) -> f64 {
    if idx == 0 {
        return 1.0;
    }
    let m = idx.div_ceil(2) as f64;
    if idx % 2 == 1 {
        (m * t).cos()
    } else {
        (m * t).sin()
    }
}

pub fn smallest_singular_value(j: &JacobianMatrix) -> Result<f64> {
    j.smallest_singular_value()
}

pub fn adjoint_apply(j: &JacobianMatrix, residual: &[f64]) -> Result<TrigCoefficients> {
    j.adjoint_apply(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{solve_scattering, uniform_directions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inner(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    /// X-inner product of coefficient vectors via Parseval.
    fn inner_x(a: &TrigCoefficients, b: &TrigCoefficients) -> f64 {
        let d = a.degree().max(b.degree());
        let (a, b) = (a.padded(d).to_packed(), b.padded(d).to_packed());
        a.iter()
            .zip(&b)
            .enumerate()
            .map(|(i, (x, y))| x * y * TrigCoefficients::basis_norm(i).powi(2))
            .sum()
    }

    #[test]
    fn circle_constant_mode_matches_finite_difference() {
        let dirs = uniform_directions(16);
        let wave = IncidentWave::new(1.0, [1.0, 0.0]).unwrap();
        let shape = TrigShape::circle([0.0, 0.0], 2.0).unwrap();
        let j = assemble_jacobian(&shape, &wave, &dirs, 0, 128).unwrap();
        let eps = 1e-5;
        let plus = solve_scattering(
            &TrigShape::circle([0.0, 0.0], 2.0 + eps).unwrap(),
            &wave,
            &dirs,
            128,
        )
        .unwrap();
        let minus = solve_scattering(
            &TrigShape::circle([0.0, 0.0], 2.0 - eps).unwrap(),
            &wave,
            &dirs,
            128,
        )
        .unwrap();
        let fd: Vec<f64> = plus
            .to_weighted_real()
            .iter()
            .zip(minus.to_weighted_real())
            .map(|(p, m)| (p - m) / (2.0 * eps))
            .collect();
        let col = j.apply(&TrigCoefficients::constant(1.0));
        let err = col
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            / fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err < 1e-4, "{err:e}");
    }

    #[test]
    fn linearity() {
        let dirs = uniform_directions(16);
        let wave = IncidentWave::new(2.0, [1.0, 0.0]).unwrap();
        let shape = TrigShape::flower(2.0, 0.3, 4).unwrap();
        let j = assemble_jacobian(&shape, &wave, &dirs, 2, 128).unwrap();
        let a = TrigCoefficients::new(0.3, vec![0.1, -0.2], vec![0.05, 0.4]).unwrap();
        let ja = j.apply(&a);
        let j3a = j.apply(&a.scaled(3.0));
        let scale = j3a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in ja.iter().zip(&j3a) {
            assert!((3.0 * x - y).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn adjoint_identity_random_pairs() {
        let dirs = uniform_directions(16);
        let wave = IncidentWave::new(3.0, [-0.5, 3f64.sqrt() / 2.0]).unwrap();
        let shape = TrigShape::flower(2.0, 0.3, 4).unwrap();
        let j = assemble_jacobian(&shape, &wave, &dirs, 5, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let packed: Vec<f64> = (0..j.ncols())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let a = TrigCoefficients::from_packed(&packed).unwrap();
            let b: Vec<f64> = (0..j.nrows())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let lhs = inner(&j.apply(&a), &b);
            let rhs = inner_x(&a, &j.adjoint_apply(&b).unwrap());
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
        }
    }

    #[test]
    fn adjoint_edge_cases() {
        let j = JacobianMatrix::from_matrix(1.0, DMatrix::from_element(1, 1, 2.5)).unwrap();
        let out = j.adjoint_apply(&[2.0]).unwrap();
        // scalar multiplication in orthonormal coordinates
        assert!((out.a0 * TrigCoefficients::basis_norm(0) - 5.0).abs() < 1e-14);
        let zero = j.adjoint_apply(&[0.0]).unwrap();
        assert_eq!(zero.l2_norm(), 0.0);
        assert!(matches!(
            j.adjoint_apply(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn singular_value_examples() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 0.5]));
        let j = JacobianMatrix::from_matrix(1.0, d).unwrap();
        assert!((j.smallest_singular_value().unwrap() - 0.5).abs() < 1e-14);
        let s = j.scaled(4.0).smallest_singular_value().unwrap();
        assert!((s - 2.0).abs() < 1e-14);
        let wide = JacobianMatrix::from_matrix(1.0, DMatrix::from_element(2, 3, 1.0)).unwrap();
        assert!(matches!(
            wide.smallest_singular_value(),
            Err(Error::RankDeficient { .. })
        ));
        let rank1 = JacobianMatrix::from_matrix(1.0, DMatrix::from_element(4, 3, 1.0)).unwrap();
        assert!(rank1.smallest_singular_value().is_err());
    }

    #[test]
    fn homogeneity_on_assembled_jacobian() {
        let dirs = uniform_directions(16);
        let wave = IncidentWave::new(1.0, [-0.5, 3f64.sqrt() / 2.0]).unwrap();
        let shape = TrigShape::flower(2.0, 0.3, 4).unwrap();
        let j = assemble_jacobian(&shape, &wave, &dirs, 3, 128).unwrap();
        let s = j.smallest_singular_value().unwrap();
        assert!(s > 0.0);
        let s3 = j.scaled(3.0).smallest_singular_value().unwrap();
        assert!((s3 - 3.0 * s).abs() < 1e-12 * s3);
    }

    #[test]
    fn basis_ordering() {
        let t = 0.7;
        assert_eq!(basis_function(0, t), 1.0);
        assert_eq!(basis_function(1, t), t.cos());
        assert_eq!(basis_function(2, t), t.sin());
        assert_eq!(basis_function(5, t), (3.0 * t).cos());
        assert_eq!(basis_function(6, t), (3.0 * t).sin());
    }
}
