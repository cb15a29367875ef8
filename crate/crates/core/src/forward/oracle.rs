//! Mie-series reference solutions for a sound-soft disk.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{FarFieldPattern, IncidentWave};
use crate::error::{Error, Result};
use crate::specfun::{bessel_j_sequence, hankel1_sequence};

const TERM_TOL: f64 = 1e-14;

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "disk radius must be positive, got {radius}"
        )))
    }
}

fn max_order(kr: f64) -> usize {
    kr.ceil() as usize + 40
}

/// Ratios `J_n(kR) / H_n(kR)` for `n = 0..`, truncated once the terms fall
/// below `1e-14` of the largest one (and `n > kR`).
fn mie_ratios(kr: f64) -> Result<Vec<Complex64>> {
    let nmax = max_order(kr);
    let j = bessel_j_sequence(nmax, kr)?;
    let h = hankel1_sequence(nmax, kr)?;
    let mut out = Vec::new();
    let mut largest = 0.0f64;
    for n in 0..=nmax {
        let a = Complex64::new(j[n], 0.0) / h[n];
        largest = largest.max(a.norm());
        out.push(a);
        if n as f64 > kr && a.norm() < TERM_TOL * largest {
            break;
        }
    }
    Ok(out)
}

fn angle(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0])
}

/// Far field of a sound-soft disk of radius `radius` centered at `center`.
pub fn disk_oracle(
    radius: f64,
    center: [f64; 2],
    wave: &IncidentWave,
    obs_dirs: &[[f64; 2]],
) -> Result<FarFieldPattern> {
    check_radius(radius)?;
    let k = wave.k();
    let theta = wave.theta();
    let ratios = mie_ratios(k * radius)?;
    let prefactor = -Complex64::from_polar((2.0 / (PI * k)).sqrt(), -PI / 4.0);
    let values = obs_dirs
        .iter()
        .map(|d| {
            let dphi = angle(*d) - angle(theta);
            let series: Complex64 = ratios[0]
                + ratios
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(n, a)| a * (2.0 * (n as f64 * dphi).cos()))
                    .sum::<Complex64>();
            let shift = k * ((theta[0] - d[0]) * center[0] + (theta[1] - d[1]) * center[1]);
            prefactor * series * Complex64::from_polar(1.0, shift)
        })
        .collect();
    FarFieldPattern::new(k, obs_dirs.to_vec(), values)
}

/// Normal derivative of the total field on a disk centered at the origin,
/// at polar angles `angles`:
/// `du/dr = -(2i / (pi R)) sum_n i^n e^{in(t - phi_theta)} / H_n(kR)`.
pub fn disk_normal_derivative(
    radius: f64,
    wave: &IncidentWave,
    angles: &[f64],
) -> Result<Vec<Complex64>> {
    check_radius(radius)?;
    let kr = wave.k() * radius;
    let nmax = max_order(kr);
    let h = hankel1_sequence(nmax, kr)?;
    let phi = angle(wave.theta());
    let pref = Complex64::new(0.0, -2.0 / (PI * radius));
    Ok(angles
        .iter()
        .map(|t| {
            let mut s = h[0].inv();
            let mut ipow = Complex64::new(1.0, 0.0);
            for (n, hn) in h.iter().enumerate().skip(1) {
                ipow *= Complex64::new(0.0, 1.0);
                s += ipow * (2.0 * (n as f64 * (t - phi)).cos()) / hn;
            }
            pref * s
        })
        .collect())
}
