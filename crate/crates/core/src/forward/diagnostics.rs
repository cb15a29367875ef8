use num_complex::Complex64;
use std::f64::consts::PI;

use super::{FarFieldPattern, IncidentWave};

/// Discrete L2(S^1) norm of samples on a uniform direction grid.
pub fn l2_norm_sphere(values: &[Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let w = 2.0 * PI / values.len() as f64;
    (w * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// Trigonometric interpolant of samples `values[p]` taken at angles
/// `2 pi p / P`, evaluated at angle `phi`. The Nyquist mode (even `P`) is
/// split symmetrically.
pub fn trig_interpolate(values: &[Complex64], phi: f64) -> Complex64 {
    let p = values.len();
    let pf = p as f64;
    let coeff = |m: i64| -> Complex64 {
        values
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, -(m as f64) * 2.0 * PI * j as f64 / pf))
            .sum::<Complex64>()
            / pf
    };
    let half = (p / 2) as i64;
    let (lo, hi) = if p.is_multiple_of(2) {
        (-half + 1, half - 1)
    } else {
        (-half, half)
    };
    let mut out: Complex64 = (lo..=hi)
        .map(|m| coeff(m) * Complex64::from_polar(1.0, m as f64 * phi))
        .sum();
    if p.is_multiple_of(2) {
        out += coeff(half) * (half as f64 * phi).cos();
    }
    out
}

/// Energy-balance defect
/// `| int |u_inf|^2 ds + sqrt(8 pi / k) Re(e^{i pi/4} u_inf(theta)) |`.
///
/// The pattern must sit on a uniform grid starting at `obs_dirs[0]`; the
/// forward value is obtained by trigonometric interpolation when `theta`
/// is not a grid direction.
pub fn optical_theorem_defect(pattern: &FarFieldPattern, wave: &IncidentWave) -> f64 {
    if pattern.is_empty() {
        return 0.0;
    }
    let energy = l2_norm_sphere(&pattern.values).powi(2);
    let d0 = pattern.obs_dirs[0];
    let theta = wave.theta();
    let phi = theta[1].atan2(theta[0]) - d0[1].atan2(d0[0]);
    let forward = trig_interpolate(&pattern.values, phi);
    let k = wave.k();
    (energy + (8.0 * PI / k).sqrt() * (Complex64::from_polar(1.0, PI / 4.0) * forward).re).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{disk_oracle, solve_scattering, uniform_directions};
    use crate::geometry::TrigShape;

    #[test]
    fn interpolation_reproduces_band_limited_functions() {
        let p = 32;
        let f = |phi: f64| Complex64::new((3.0 * phi).cos(), (5.0 * phi).sin() + 0.5);
        let samples: Vec<Complex64> = (0..p).map(|j| f(2.0 * PI * j as f64 / p as f64)).collect();
        for phi in [0.1, 1.3, 2.0 * PI / 3.0, 5.9] {
            assert!((trig_interpolate(&samples, phi) - f(phi)).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_pattern_has_zero_defect() {
        let dirs = uniform_directions(64);
        let wave = IncidentWave::new(1.0, [1.0, 0.0]).unwrap();
        let p = FarFieldPattern::new(1.0, dirs, vec![Complex64::new(0.0, 0.0); 64]).unwrap();
        assert_eq!(optical_theorem_defect(&p, &wave), 0.0);
    }

    #[test]
    fn disk_oracle_conserves_energy() {
        let dirs = uniform_directions(64);
        for theta in [[1.0, 0.0], [-0.5, 3f64.sqrt() / 2.0]] {
            let wave = IncidentWave::new(1.0, theta).unwrap();
            let p = disk_oracle(2.0, [0.0, 0.0], &wave, &dirs).unwrap();
            let e = p.l2_norm().powi(2);
            assert!(optical_theorem_defect(&p, &wave) <= 1e-6 * e);
        }
    }

    #[test]
    fn nystrom_solution_conserves_energy() {
        let dirs = uniform_directions(64);
        let wave = IncidentWave::new(4.0, [-0.5, 3f64.sqrt() / 2.0]).unwrap();
        let shape = TrigShape::flower(2.0, 0.3, 4).unwrap();
        let p = solve_scattering(&shape, &wave, &dirs, 128).unwrap();
        let e = p.l2_norm().powi(2);
        assert!(optical_theorem_defect(&p, &wave) <= 1e-6 * e);
    }
}
