//! Star-shaped boundaries described by a center and a truncated Fourier
//! series of the radial function, together with the nested trigonometric
//! subspaces used by the reconstruction.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Minimum boundary speed accepted by [`TrigShape::eval_boundary`].
pub const MIN_SPEED: f64 = 1e-12;

/// Coefficients of `r(t) = a0 + sum_m (cos[m-1] cos mt + sin[m-1] sin mt)`.
///
/// The basis is the unnormalized `{1, cos mt, sin mt}`; norms are computed
/// through Parseval with the `2 pi` / `pi` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigCoefficients {
    pub a0: f64,
    #[serde(rename = "cos")]
    pub cos_coeffs: Vec<f64>,
    #[serde(rename = "sin")]
    pub sin_coeffs: Vec<f64>,
}

impl TrigCoefficients {
    pub fn new(a0: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Result<Self> {
        if cos_coeffs.len() != sin_coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: cos_coeffs.len(),
                got: sin_coeffs.len(),
            });
        }
        let c = TrigCoefficients {
            a0,
            cos_coeffs,
            sin_coeffs,
        };
        if !c.iter_packed().all(f64::is_finite) {
            return Err(Error::InvalidShape("non-finite Fourier coefficient".into()));
        }
        Ok(c)
    }

    pub fn zeros(degree: usize) -> Self {
        TrigCoefficients {
            a0: 0.0,
            cos_coeffs: vec![0.0; degree],
            sin_coeffs: vec![0.0; degree],
        }
    }

    pub fn constant(a0: f64) -> Self {
        TrigCoefficients {
            a0,
            cos_coeffs: Vec::new(),
            sin_coeffs: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.cos_coeffs.len()
    }

    /// Number of real parameters, `2M + 1`.
    pub fn len(&self) -> usize {
        2 * self.degree() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coefficients in packed order `a0, cos_1, sin_1, ..., cos_M, sin_M`.
    pub fn iter_packed(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.a0).chain(
            self.cos_coeffs
                .iter()
                .zip(&self.sin_coeffs)
                .flat_map(|(&c, &s)| [c, s]),
        )
    }

    pub fn to_packed(&self) -> Vec<f64> {
        self.iter_packed().collect()
    }

    /// Inverse of [`Self::to_packed`]; `packed.len()` must be odd.
    pub fn from_packed(packed: &[f64]) -> Result<Self> {
        if packed.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: packed.len() + 1,
                got: packed.len(),
            });
        }
        let degree = packed.len() / 2;
        let mut c = TrigCoefficients::zeros(degree);
        c.a0 = packed[0];
        for m in 0..degree {
            c.cos_coeffs[m] = packed[1 + 2 * m];
            c.sin_coeffs[m] = packed[2 + 2 * m];
        }
        Ok(c)
    }

    /// L2[0, 2pi] norm of the basis function at packed index `idx`.
    pub fn basis_norm(idx: usize) -> f64 {
        if idx == 0 {
            (2.0 * PI).sqrt()
        } else {
            PI.sqrt()
        }
    }

    /// Evaluates `(r, r', r'')` at `t`.
    pub fn eval_with_derivatives(&self, t: f64) -> (f64, f64, f64) {
        let (mut r, mut dr, mut ddr) = (self.a0, 0.0, 0.0);
        for (m, (&b, &g)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let mf = (m + 1) as f64;
            let (s, c) = (mf * t).sin_cos();
            r += b * c + g * s;
            dr += mf * (g * c - b * s);
            ddr -= mf * mf * (b * c + g * s);
        }
        (r, dr, ddr)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivatives(t).0
    }

    /// Orthogonal projection onto the degree-`degree` subspace.
    ///
    /// In the orthogonal trigonometric basis this is truncation; it never
    /// pads, so the output degree is `min(self.degree(), degree)`.
    pub fn project(&self, degree: usize) -> Self {
        let keep = degree.min(self.degree());
        TrigCoefficients {
            a0: self.a0,
            cos_coeffs: self.cos_coeffs[..keep].to_vec(),
            sin_coeffs: self.sin_coeffs[..keep].to_vec(),
        }
    }

    /// Zero-pads (or keeps) so the degree is at least `degree`.
    pub fn padded(&self, degree: usize) -> Self {
        let mut c = self.clone();
        if degree > c.degree() {
            c.cos_coeffs.resize(degree, 0.0);
            c.sin_coeffs.resize(degree, 0.0);
        }
        c
    }

    /// L2[0, 2pi] norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let osc: f64 = self
            .cos_coeffs
            .iter()
            .chain(&self.sin_coeffs)
            .map(|c| c * c)
            .sum();
        (2.0 * PI * self.a0 * self.a0 + PI * osc).sqrt()
    }

    pub fn add(&self, other: &TrigCoefficients) -> Self {
        let degree = self.degree().max(other.degree());
        let (a, b) = (self.padded(degree), other.padded(degree));
        TrigCoefficients {
            a0: a.a0 + b.a0,
            cos_coeffs: a
                .cos_coeffs
                .iter()
                .zip(&b.cos_coeffs)
                .map(|(x, y)| x + y)
                .collect(),
            sin_coeffs: a
                .sin_coeffs
                .iter()
                .zip(&b.sin_coeffs)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn sub(&self, other: &TrigCoefficients) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        TrigCoefficients {
            a0: s * self.a0,
            cos_coeffs: self.cos_coeffs.iter().map(|c| s * c).collect(),
            sin_coeffs: self.sin_coeffs.iter().map(|c| s * c).collect(),
        }
    }

    /// Smallest value of `r` on the uniform validation grid of `8M + 16` points.
    pub fn min_on_grid(&self) -> f64 {
        let n = 8 * self.degree() + 16;
        (0..n)
            .map(|i| self.eval(2.0 * PI * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Point, tangent `x'(t)`, unit outward normal and speed `|x'(t)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub speed: f64,
}

/// Star-shaped boundary `x(t) = x0 + r(t) (cos t, sin t)`, traversed
/// counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRecord", into = "ShapeRecord")]
pub struct TrigShape {
    center: [f64; 2],
    radial: TrigCoefficients,
}

/// Serialized layout `{center: [x, y], a0, cos: [...], sin: [...]}`.
#[derive(Serialize, Deserialize)]
struct ShapeRecord {
    center: [f64; 2],
    a0: f64,
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

impl TryFrom<ShapeRecord> for TrigShape {
    type Error = Error;

    fn try_from(rec: ShapeRecord) -> Result<Self> {
        TrigShape::new(rec.center, TrigCoefficients::new(rec.a0, rec.cos, rec.sin)?)
    }
}

impl From<TrigShape> for ShapeRecord {
    fn from(s: TrigShape) -> Self {
        ShapeRecord {
            center: s.center,
            a0: s.radial.a0,
            cos: s.radial.cos_coeffs,
            sin: s.radial.sin_coeffs,
        }
    }
}

impl TrigShape {
    /// Validates finiteness and positivity of `r` on the `8M + 16` grid.
    pub fn new(center: [f64; 2], radial: TrigCoefficients) -> Result<Self> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidShape("non-finite center".into()));
        }
        if !radial.iter_packed().all(f64::is_finite) {
            return Err(Error::InvalidShape("non-finite Fourier coefficient".into()));
        }
        let min = radial.min_on_grid();
        if !(min > 0.0) {
            return Err(Error::InvalidShape(format!(
                "radial function not positive (min {min:e})"
            )));
        }
        Ok(TrigShape { center, radial })
    }

    pub fn circle(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::new(center, TrigCoefficients::constant(radius))
    }

    /// Flower `c1 (1 + c2 cos(c3 t))` centered at the origin; `c3` is the
    /// (integer) number of petals.
    pub fn flower(c1: f64, c2: f64, petals: usize) -> Result<Self> {
        let mut radial = TrigCoefficients::zeros(petals.max(1));
        radial.a0 = c1;
        if petals == 0 {
            radial.a0 += c1 * c2;
        } else {
            radial.cos_coeffs[petals - 1] = c1 * c2;
        }
        Self::new([0.0, 0.0], radial)
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn radial(&self) -> &TrigCoefficients {
        &self.radial
    }

    pub fn degree(&self) -> usize {
        self.radial.degree()
    }

    pub fn with_radial(&self, radial: TrigCoefficients) -> Result<Self> {
        Self::new(self.center, radial)
    }

    pub fn eval_radius(&self, t: f64) -> f64 {
        self.radial.eval(t.rem_euclid(2.0 * PI))
    }

    pub fn eval_boundary(&self, t: f64) -> Result<BoundaryPoint> {
        let geo = self.eval_geometry(t);
        let speed = geo.speed();
        if !(speed >= MIN_SPEED) {
            return Err(Error::DegenerateBoundary { t, speed });
        }
        let n = geo.outward_normal();
        Ok(BoundaryPoint {
            point: geo.point,
            tangent: geo.d1,
            normal: [n[0] / speed, n[1] / speed],
            speed,
        })
    }

    /// Point with first and second parameter derivatives.
    pub(crate) fn eval_geometry(&self, t: f64) -> CurveJet {
        let (r, dr, ddr) = self.radial.eval_with_derivatives(t);
        let (s, c) = t.sin_cos();
        CurveJet {
            point: [self.center[0] + r * c, self.center[1] + r * s],
            d1: [dr * c - r * s, dr * s + r * c],
            d2: [
                ddr * c - 2.0 * dr * s - r * c,
                ddr * s + 2.0 * dr * c - r * s,
            ],
            radius: r,
        }
    }

    /// Distance from `center` to the boundary along each polar angle.
    ///
    /// `center` must lie inside the curve and the curve must be star-shaped
    /// with respect to it.
    pub fn radial_about(&self, center: [f64; 2], angles: &[f64]) -> Vec<f64> {
        if center == self.center {
            return angles.iter().map(|&a| self.eval_radius(a)).collect();
        }
        const SAMPLES: usize = 2048;
        let polar = |t: f64| {
            let p = self.eval_geometry(t).point;
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            (dy.atan2(dx), dx.hypot(dy))
        };
        let wrap = |a: f64| (a + PI).rem_euclid(2.0 * PI) - PI;
        let ts: Vec<f64> = (0..=SAMPLES)
            .map(|i| 2.0 * PI * i as f64 / SAMPLES as f64)
            .collect();
        let mut psi = Vec::with_capacity(SAMPLES + 1);
        psi.push(polar(0.0).0);
        for i in 1..=SAMPLES {
            let prev = psi[i - 1];
            psi.push(prev + wrap(polar(ts[i]).0 - prev));
        }
        let base = psi[0];
        angles
            .iter()
            .map(|&a| {
                let target = base + (a - base).rem_euclid(2.0 * PI);
                let i = psi.partition_point(|&v| v <= target).clamp(1, SAMPLES) - 1;
                let (mut lo, mut hi) = (ts[i], ts[i + 1]);
                let anchor = psi[i];
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let v = anchor + wrap(polar(mid).0 - anchor);
                    if v <= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                polar(0.5 * (lo + hi)).1
            })
            .collect()
    }

    /// Relative L2 radial error `||r_self - r_other|| / ||r_self||`, with
    /// both radial functions taken about the center of `other`.
    pub fn relative_error(&self, other: &TrigShape) -> f64 {
        if self.center == other.center {
            return self.radial.sub(&other.radial).l2_norm() / self.radial.l2_norm();
        }
        self.sampled_error(other, |_| true)
    }

    /// Relative L2 radial error restricted to the part of the parameter
    /// range facing the incoming wave, `(cos t, sin t) . theta < 0`.
    pub fn illuminated_error(&self, other: &TrigShape, theta: [f64; 2]) -> f64 {
        self.sampled_error(other, |t| t.cos() * theta[0] + t.sin() * theta[1] < 0.0)
    }

    fn sampled_error(&self, other: &TrigShape, keep: impl Fn(f64) -> bool) -> f64 {
        const SAMPLES: usize = 4096;
        let angles: Vec<f64> = (0..SAMPLES)
            .map(|i| 2.0 * PI * i as f64 / SAMPLES as f64)
            .filter(|&t| keep(t))
            .collect();
        let mine = self.radial_about(other.center, &angles);
        let (mut num, mut den) = (0.0, 0.0);
        for (&t, &rt) in angles.iter().zip(&mine) {
            let d = rt - other.radial.eval(t);
            num += d * d;
            den += rt * rt;
        }
        (num / den).sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CurveJet {
    pub point: [f64; 2],
    pub d1: [f64; 2],
    pub d2: [f64; 2],
    pub radius: f64,
}

impl CurveJet {
    pub fn speed(&self) -> f64 {
        self.d1[0].hypot(self.d1[1])
    }

    /// `(x2', -x1')`: outward for counterclockwise curves, length `|x'|`.
    pub fn outward_normal(&self) -> [f64; 2] {
        [self.d1[1], -self.d1[0]]
    }
}

/// Degrees `M_0 <= M_1 <= ... <= M_N`, one per frequency index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubspaceSchedule(Vec<usize>);

impl SubspaceSchedule {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Config("empty subspace schedule".into()));
        }
        if degrees.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(format!(
                "subspace schedule must be nondecreasing: {degrees:?}"
            )));
        }
        Ok(SubspaceSchedule(degrees))
    }

    /// `M_n = min(cap, max(1, round(k_n * mean_radius)))`.
    pub fn from_wavenumbers(wavenumbers: &[f64], mean_radius: f64, cap: usize) -> Result<Self> {
        let degrees = wavenumbers
            .iter()
            .map(|k| ((k * mean_radius).round() as usize).max(1).min(cap))
            .collect();
        Self::new(degrees)
    }

    pub fn degree(&self, n: usize) -> usize {
        self.0[n.min(self.0.len() - 1)]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<usize>> for SubspaceSchedule {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SubspaceSchedule> for Vec<usize> {
    fn from(s: SubspaceSchedule) -> Self {
        s.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flower() -> TrigShape {
        TrigShape::flower(2.0, 0.3, 4).unwrap()
    }

    #[test]
    fn radius_examples() {
        assert!((flower().eval_radius(0.0) - 2.6).abs() < 1e-15);
        let circle = TrigShape::circle([0.3, -1.0], 2.0).unwrap();
        for t in [0.0, 1.0, 4.0, -7.0] {
            assert_eq!(circle.eval_radius(t), 2.0);
        }
        let c = TrigCoefficients::new(1.0, vec![0.0], vec![0.5]).unwrap();
        assert!((c.eval(PI / 2.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_examples() {
        let center = [0.5, -0.25];
        let circle = TrigShape::circle(center, 2.0).unwrap();
        let b = circle.eval_boundary(0.0).unwrap();
        assert!((b.point[0] - 2.5).abs() < 1e-15 && (b.point[1] + 0.25).abs() < 1e-15);
        assert!((b.normal[0] - 1.0).abs() < 1e-15 && b.normal[1].abs() < 1e-15);
        assert!((b.speed - 2.0).abs() < 1e-15);
        let b = circle.eval_boundary(PI / 2.0).unwrap();
        assert!((b.point[0] - 0.5).abs() < 1e-15 && (b.point[1] - 1.75).abs() < 1e-15);
        assert!(b.normal[0].abs() < 1e-15 && (b.normal[1] - 1.0).abs() < 1e-15);
        let b = flower().eval_boundary(0.0).unwrap();
        assert!((b.speed - 2.6).abs() < 1e-14);
    }

    #[test]
    fn radial_about_shifted_circle() {
        // circle |x - c| = R seen from the origin: rho = c.e + sqrt(R^2 - |c|^2 + (c.e)^2)
        let c = [0.3, -0.2];
        let circle = TrigShape::circle(c, 1.5).unwrap();
        let angles: Vec<f64> = (0..50).map(|i| -3.0 + 0.17 * i as f64).collect();
        let got = circle.radial_about([0.0, 0.0], &angles);
        for (a, r) in angles.iter().zip(got) {
            let ce = c[0] * a.cos() + c[1] * a.sin();
            let exact = ce + (1.5f64.powi(2) - (c[0] * c[0] + c[1] * c[1]) + ce * ce).sqrt();
            assert!((r - exact).abs() < 1e-12, "{a}: {r} vs {exact}");
        }
        let at_origin = TrigShape::circle([0.0, 0.0], 1.5).unwrap();
        assert!(circle.relative_error(&circle) == 0.0);
        assert!(circle.relative_error(&at_origin) > 0.1);
        let same = TrigShape::new([0.0, 0.0], flower().radial().clone()).unwrap();
        let moved = TrigShape::new([1e-9, 0.0], flower().radial().clone()).unwrap();
        assert!(same.relative_error(&moved) < 1e-8);
    }

    #[test]
    fn positivity_is_enforced() {
        let bad = TrigCoefficients::new(0.5, vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(
            TrigShape::new([0.0, 0.0], bad),
            Err(Error::InvalidShape(_))
        ));
        assert!(TrigCoefficients::new(f64::NAN, vec![], vec![]).is_err());
    }

    #[test]
    fn projection_examples() {
        let mut c = TrigCoefficients::zeros(5);
        c.a0 = 1.0;
        c.sin_coeffs[4] = 0.3;
        assert_eq!(c.project(2), TrigCoefficients::constant(1.0).padded(2));
        assert_eq!(c.project(5), c);
        assert_eq!(c.project(9), c);
        assert_eq!(c.project(4).project(2), c.project(2));
    }

    #[test]
    fn norm_examples() {
        assert!((TrigCoefficients::constant(1.0).l2_norm() - (2.0 * PI).sqrt()).abs() < 1e-15);
        let c = TrigCoefficients::new(0.0, vec![1.0], vec![0.0]).unwrap();
        assert!((c.l2_norm() - PI.sqrt()).abs() < 1e-15);
        assert_eq!(TrigCoefficients::zeros(3).l2_norm(), 0.0);
    }

    #[test]
    fn schedule_must_be_nondecreasing() {
        assert!(SubspaceSchedule::new(vec![1, 2, 2, 5]).is_ok());
        assert!(SubspaceSchedule::new(vec![1, 3, 2]).is_err());
        let s = SubspaceSchedule::from_wavenumbers(&[0.5, 2.0, 8.0], 2.0, 12).unwrap();
        assert_eq!(s.degrees(), &[1, 4, 12]);
    }

    #[test]
    fn shape_json_layout() {
        let s = TrigShape::new(
            [1.0, 2.0],
            TrigCoefficients::new(2.0, vec![0.1], vec![-0.2]).unwrap(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v["center"], serde_json::json!([1.0, 2.0]));
        assert_eq!(v["a0"], serde_json::json!(2.0));
        assert_eq!(v["cos"], serde_json::json!([0.1]));
        assert_eq!(v["sin"], serde_json::json!([-0.2]));
        let back: TrigShape = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({"center": [0.0, 0.0], "a0": -1.0});
        assert!(serde_json::from_value::<TrigShape>(bad).is_err());
    }

    fn coeffs(max_degree: usize) -> impl Strategy<Value = TrigCoefficients> {
        (0..=max_degree).prop_flat_map(|m| {
            (
                -2.0..2.0f64,
                prop::collection::vec(-1.0..1.0f64, m),
                prop::collection::vec(-1.0..1.0f64, m),
            )
                .prop_map(|(a0, c, s)| TrigCoefficients::new(a0, c, s).unwrap())
        })
    }

    proptest! {
        #[test]
        fn projection_idempotent_and_nonexpansive(c in coeffs(12), m in 0usize..14) {
            let p = c.project(m);
            prop_assert_eq!(p.project(m), p.clone());
            prop_assert!(p.l2_norm() <= c.l2_norm());
        }

        #[test]
        fn norm_matches_trapezoid(c in coeffs(32)) {
            let n = 4096;
            let h = 2.0 * PI / n as f64;
            let quad: f64 = (0..n).map(|i| c.eval(i as f64 * h).powi(2)).sum::<f64>() * h;
            let exact = c.l2_norm().powi(2);
            prop_assert!((quad - exact).abs() <= 1e-10 * exact.max(1e-300));
        }

        #[test]
        fn normals_are_unit_and_outward(radius in 0.2..5.0f64, t in 0.0..(2.0 * PI)) {
            let s = TrigShape::circle([0.3, 0.1], radius).unwrap();
            let b = s.eval_boundary(t).unwrap();
            prop_assert!((b.normal[0].hypot(b.normal[1]) - 1.0).abs() < 1e-12);
            prop_assert!(b.normal[0] * t.cos() + b.normal[1] * t.sin() > 0.0);
        }

        #[test]
        fn tangent_matches_finite_difference(c in coeffs(6), t in 0.0..(2.0 * PI)) {
            let c = TrigCoefficients { a0: c.a0.abs() + 8.0, ..c };
            let s = TrigShape::new([0.0, 0.0], c).unwrap();
            let h = 1e-6;
            let b = s.eval_boundary(t).unwrap();
            let p = s.eval_boundary(t + h).unwrap().point;
            let m = s.eval_boundary(t - h).unwrap().point;
            for d in 0..2 {
                prop_assert!(((p[d] - m[d]) / (2.0 * h) - b.tangent[d]).abs() < 1e-6);
            }
        }
    }
}
