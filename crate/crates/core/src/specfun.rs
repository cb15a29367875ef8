//! Integer-order Bessel functions `J_n`, `Y_n` and Hankel functions
//! `H_n^(1) = J_n + i Y_n` of real positive argument.
//!
//! `J_n` comes from the ascending series when `x < 1` and from Miller's
//! downward recurrence normalized by `J_0 + 2 sum J_2k = 1` otherwise.
//! `Y_0` and `Y_1` use the Neumann expansions in even/odd `J_k`, which are
//! accumulated during the same downward sweep; higher `Y_n` follow by
//! upward recurrence.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CUTOFF: f64 = 1.0;
const RESCALE_ABOVE: f64 = 1e250;

fn check_arg(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Bessel argument must be positive, got {x}"
        )))
    }
}

/// Ascending series for a single `J_n(x)`.
fn j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Start order for the downward recurrence.
fn miller_start(nmax: usize, x: f64) -> usize {
    let base = nmax.max(x.ceil() as usize) + 30 + (12.0 * x.cbrt()).ceil() as usize;
    base + base % 2
}

/// Result of one downward sweep: `J_0..=J_nmax` and the two Neumann sums.
struct Sweep {
    j: Vec<f64>,
    /// `sum_{k>=1} (-1)^k J_2k / k`
    even_sum: f64,
    /// `sum_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k`
    odd_sum: f64,
}

fn sweep(nmax: usize, x: f64) -> Sweep {
    let nmax_eff = nmax.max(1);
    if x < SERIES_CUTOFF {
        // J_k(x) decays like (x/2)^k / k!; 30 extra orders exhaust double precision.
        let top = nmax_eff.max(2) + 30;
        let all: Vec<f64> = (0..=top + 1).map(|k| j_series(k, x)).collect();
        let (mut even_sum, mut odd_sum) = (0.0, 0.0);
        for k in 1..=top / 2 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            even_sum += sign * all[2 * k] / k as f64;
            odd_sum += sign * (all[2 * k - 1] - all[2 * k + 1]) / k as f64;
        }
        return Sweep {
            j: all[..=nmax].to_vec(),
            even_sum,
            odd_sum,
        };
    }

    let start = miller_start(nmax_eff, x);
    let mut j = vec![0.0; nmax + 1];
    let (mut next, mut cur) = (0.0f64, 1e-300f64); // J_{start+1}, J_start
    let (mut norm, mut even_sum, mut odd_sum) = (0.0, 0.0, 0.0);
    for m in (0..=start).rev() {
        if m <= nmax {
            j[m] = cur;
        }
        if m > 0 && m % 2 == 0 {
            let k = m / 2;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            norm += 2.0 * cur;
            even_sum += sign * cur / k as f64;
        }
        if m % 2 == 1 {
            // m = 2k - 1 contributes +J_m / k, and m = 2k + 1 contributes -J_m / k
            let k_lo = m.div_ceil(2);
            let sign_lo = if k_lo % 2 == 0 { 1.0 } else { -1.0 };
            odd_sum += sign_lo * cur / k_lo as f64;
            if m >= 3 {
                let k_hi = (m - 1) / 2;
                let sign_hi = if k_hi % 2 == 0 { 1.0 } else { -1.0 };
                odd_sum -= sign_hi * cur / k_hi as f64;
            }
        }
        if m == 0 {
            norm += cur;
            break;
        }
        let prev = 2.0 * m as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            cur *= s;
            next *= s;
            norm *= s;
            even_sum *= s;
            odd_sum *= s;
            for v in j.iter_mut() {
                *v *= s;
            }
        }
    }
    let scale = 1.0 / norm;
    j.iter_mut().for_each(|v| *v *= scale);
    Sweep {
        j,
        even_sum: even_sum * scale,
        odd_sum: odd_sum * scale,
    }
}

fn y01_from_sweep(x: f64, s: &Sweep, j0: f64, j1: f64) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = 2.0 / PI * log_term * j0 - 4.0 / PI * s.even_sum;
    let y1 = 2.0 / PI * log_term * j1 - 2.0 / (PI * x) * j0 + 2.0 / PI * s.odd_sum;
    (y0, y1)
}

/// `J_0..=J_nmax` at `x`.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    Ok(sweep(nmax, x).j)
}

/// `Y_0..=Y_nmax` at `x`.
pub fn bessel_y_sequence(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let s = sweep(nmax.max(1), x);
    let (y0, y1) = y01_from_sweep(x, &s, s.j[0], s.j[1]);
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax >= 1 {
        y.push(y1);
    }
    for n in 1..nmax {
        let v = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(v);
    }
    Ok(y)
}

/// `H_0^(1)..=H_nmax^(1)` at `x`.
pub fn hankel1_sequence(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let j = bessel_j_sequence(nmax, x)?;
    let y = bessel_y_sequence(nmax, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    check_arg(x)?;
    if x < SERIES_CUTOFF {
        return Ok(j_series(n, x));
    }
    Ok(sweep(n, x).j[n])
}

pub fn bessel_y(n: usize, x: f64) -> Result<f64> {
    Ok(bessel_y_sequence(n, x)?[n])
}

pub fn hankel1(n: usize, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(bessel_j(n, x)?, bessel_y(n, x)?))
}

/// `(J_0, J_1, Y_0, Y_1)` from a single sweep; used by the boundary kernels.
pub fn bessel_jy01(x: f64) -> Result<[f64; 4]> {
    check_arg(x)?;
    let s = sweep(1, x);
    let (j0, j1) = (s.j[0], s.j[1]);
    let (y0, y1) = y01_from_sweep(x, &s, j0, j1);
    Ok([j0, j1, y0, y1])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent ascending-series oracles, summed term by term.
    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    fn harmonic(n: usize) -> f64 {
        (1..=n).map(|i| 1.0 / i as f64).sum()
    }

    fn j_oracle(n: usize, x: f64) -> f64 {
        (0..40)
            .map(|k| {
                (-1f64).powi(k as i32) * (x / 2.0).powi((2 * k + n) as i32)
                    / (factorial(k) * factorial(k + n))
            })
            .sum()
    }

    fn y0_oracle(x: f64) -> f64 {
        let s: f64 = (1..40)
            .map(|k| {
                (-1f64).powi(k as i32 + 1) * harmonic(k) * (x / 2.0).powi(2 * k as i32)
                    / factorial(k).powi(2)
            })
            .sum();
        2.0 / PI * ((x / 2.0).ln() + EULER_GAMMA) * j_oracle(0, x) + 2.0 / PI * s
    }

    fn y1_oracle(x: f64) -> f64 {
        let s: f64 = (0..40)
            .map(|k| {
                (-1f64).powi(k as i32)
                    * (harmonic(k) + harmonic(k + 1))
                    * (x / 2.0).powi(2 * k as i32 + 1)
                    / (factorial(k) * factorial(k + 1))
            })
            .sum();
        -2.0 / (PI * x) + 2.0 / PI * ((x / 2.0).ln() + EULER_GAMMA) * j_oracle(1, x) - s / PI
    }

    #[test]
    fn oracle_values_at_one() {
        // frozen from the oracles above
        assert!((j_oracle(0, 1.0) - 0.765_197_686_6).abs() < 1e-10);
        assert!((j_oracle(1, 1.0) - 0.440_050_585_7).abs() < 1e-10);
        assert!((y0_oracle(1.0) - 0.088_256_964_2).abs() < 1e-10);
        assert!((y1_oracle(1.0) + 0.781_212_821_3).abs() < 1e-10);
    }

    #[test]
    fn matches_series_oracles() {
        for &x in &[1e-8, 0.3, 1.0, 2.5, 4.0, 6.0] {
            for n in 0..8 {
                let (a, b) = (bessel_j(n, x).unwrap(), j_oracle(n, x));
                assert!(
                    (a - b).abs() <= 1e-13 * b.abs().max(1e-300) + 1e-15,
                    "J_{n}({x})"
                );
            }
            let [j0, j1, y0, y1] = bessel_jy01(x).unwrap();
            assert!((j0 - j_oracle(0, x)).abs() < 1e-14);
            assert!((j1 - j_oracle(1, x)).abs() < 1e-14);
            assert!(
                (y0 - y0_oracle(x)).abs() <= 1e-12 * y0.abs().max(1.0),
                "Y0({x})"
            );
            assert!(
                (y1 - y1_oracle(x)).abs() <= 1e-12 * y1.abs().max(1.0),
                "Y1({x})"
            );
        }
    }

    #[test]
    fn spot_values() {
        assert!((bessel_j(0, 1e-8).unwrap() - 1.0).abs() < 1e-12);
        assert!((bessel_j(0, 1.0).unwrap() - 0.765_197_686_6).abs() < 1e-10);
        assert!((bessel_j(1, 1.0).unwrap() - 0.440_050_585_7).abs() < 1e-10);
        assert!((bessel_y(0, 1.0).unwrap() - 0.088_256_964_2).abs() < 1e-10);
        assert!((bessel_y(1, 1.0).unwrap() + 0.781_212_821_3).abs() < 1e-10);
        let h = hankel1(0, 1.0).unwrap();
        assert!((h.re - 0.765_197_686_6).abs() < 1e-10 && (h.im - 0.088_256_964_2).abs() < 1e-10);
        let x = 3.7;
        let w = bessel_j(1, x).unwrap() * bessel_y(0, x).unwrap()
            - bessel_j(0, x).unwrap() * bessel_y(1, x).unwrap();
        assert!((w - 2.0 / (PI * x)).abs() < 1e-13);
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(matches!(bessel_j(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_y(1, -1.0), Err(Error::Domain(_))));
        assert!(hankel1(2, f64::NAN).is_err());
    }

    const GRID: [f64; 6] = [0.5, 1.0, 4.0, 8.0, 16.0, 40.0];

    #[test]
    fn wronskian_identity() {
        for &x in &GRID {
            let j = bessel_j_sequence(21, x).unwrap();
            let y = bessel_y_sequence(21, x).unwrap();
            let expected = 2.0 / (PI * x);
            for n in 0..=20 {
                let w = j[n + 1] * y[n] - j[n] * y[n + 1];
                assert!((w - expected).abs() <= 1e-9 * expected, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn three_term_recurrence() {
        for &x in &GRID {
            let h = hankel1_sequence(22, x).unwrap();
            for n in 1..=20 {
                let lhs = h[n + 1];
                let rhs = h[n] * (2.0 * n as f64 / x) - h[n - 1];
                assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm(), "n={n} x={x}");
            }
            let j = bessel_j_sequence(22, x).unwrap();
            for n in 1..=20 {
                let lhs = j[n + 1];
                let rhs = 2.0 * n as f64 / x * j[n] - j[n - 1];
                let scale = j[n + 1].abs().max(j[n].abs()).max(j[n - 1].abs());
                assert!((lhs - rhs).abs() <= 1e-9 * scale, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn single_order_matches_sequence() {
        for &x in &GRID {
            let j = bessel_j_sequence(12, x).unwrap();
            for n in 0..=12 {
                assert!((bessel_j(n, x).unwrap() - j[n]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn small_argument_asymptotics() {
        let x = 1e-3;
        for n in 0..=5 {
            let approx = (x / 2.0f64).powi(n as i32) / factorial(n);
            let j = bessel_j(n, x).unwrap();
            assert!(((j - approx) / approx).abs() < 0.01);
        }
    }

    #[test]
    fn hankel_modulus_dominates_j() {
        for &x in &GRID {
            let h = hankel1_sequence(15, x).unwrap();
            for hn in h {
                assert!(hn.norm() >= hn.re.abs());
            }
        }
    }
}
