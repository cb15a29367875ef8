//! Dense complex LU factorization with partial pivoting.
//!
//! A single factorization serves both `A x = b` and `A^T x = b` (plain
//! transpose, no conjugation), which is what the Dirichlet solves and the
//! normal-derivative solve of the same boundary operator need.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative pivot threshold against the infinity norm of the matrix.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows_mut(&mut self) -> std::slice::ChunksExactMut<'_, Complex64> {
        self.data.chunks_exact_mut(self.n)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `P A = L U` with unit lower `L`; `perm[i]` is the row of `A` that ends up
/// in row `i`.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl ComplexLu {
    pub fn factor(mut a: ComplexMatrix) -> Result<Self> {
        let n = a.n;
        let tolerance = PIVOT_TOLERANCE * a.norm_inf();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (p, pmax) =
                (col..n)
                    .map(|r| (r, a.get(r, col).norm()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(pmax > tolerance) {
                return Err(Error::SingularSystem {
                    pivot: pmax,
                    tolerance,
                });
            }
            if p != col {
                for j in 0..n {
                    a.data.swap(p * n + j, col * n + j);
                }
                perm.swap(p, col);
            }
            let inv = a.get(col, col).inv();
            let (head, tail) = a.data.split_at_mut((col + 1) * n);
            let pivot_row = &head[col * n..];
            for row in tail.chunks_exact_mut(n) {
                let factor = row[col] * inv;
                row[col] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in col + 1..n {
                    row[j] -= factor * pivot_row[j];
                }
            }
        }
        Ok(ComplexLu { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.n
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.lu.n {
            return Err(Error::DimensionMismatch {
                expected: self.lu.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(b.len())?;
        let n = self.lu.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu.data[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu.data[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu.data[i * n + i];
        }
        Ok(x)
    }

    /// Solves `A^T x = b` (transpose without conjugation).
    pub fn solve_transpose(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(b.len())?;
        let n = self.lu.n;
        // A^T = U^T L^T P, so solve U^T y = b, then L^T z = y, then x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            y[i] /= self.lu.get(i, i);
            let yi = y[i];
            for j in i + 1..n {
                y[j] -= self.lu.get(i, j) * yi;
            }
        }
        for i in (0..n).rev() {
            let yi = y[i];
            for j in 0..i {
                y[j] -= self.lu.get(i, j) * yi;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_rows(n, data).unwrap()
    }

    fn residual(a: &ComplexMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn solves_and_transposed_solves() {
        for (n, seed) in [(1, 1), (5, 2), (40, 3)] {
            let a = random_matrix(n, seed);
            let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
            let lu = ComplexLu::factor(a.clone()).unwrap();
            let x = lu.solve(&b).unwrap();
            assert!(residual(&a, &x, &b) < 1e-10);

            let mut at = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    at.set(i, j, a.get(j, i));
                }
            }
            let xt = lu.solve_transpose(&b).unwrap();
            assert!(residual(&at, &xt, &b) < 1e-10);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = random_matrix(4, 9);
        for j in 0..4 {
            let v = a.get(0, j);
            a.set(2, j, v * 2.0);
        }
        assert!(matches!(
            ComplexLu::factor(a),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn dimension_is_checked() {
        let lu = ComplexLu::factor(random_matrix(3, 4)).unwrap();
        assert!(matches!(
            lu.solve(&[Complex64::new(1.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
