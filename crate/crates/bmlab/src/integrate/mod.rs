//! Integration of weighted integrands over bodies: deterministic polar
//! quadrature with a paired error estimate, or stratified Monte Carlo with a
//! standard error. Every result carries its own accuracy estimate so callers
//! can propagate tolerances instead of guessing them.

mod field;
mod mc;
mod polar;

pub use field::{integrate_field, Field};

use serde::{Deserialize, Serialize};

use crate::geometry::{ConcaveFn, SymmetricBody};
use crate::measures::WeightedMeasure;
use crate::num;
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadMode {
    Polar,
    Mc,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub mode: QuadMode,
    /// Radial Gauss order; the refinement pass doubles it.
    pub radial_order: usize,
    pub mc_samples: usize,
    pub seed: u64,
    /// Sub-stream, so one seed can drive many independent integrals.
    pub stream: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            mode: QuadMode::Polar,
            radial_order: 64,
            mc_samples: 1 << 18,
            seed: 0,
            stream: 0,
        }
    }
}

impl QuadratureSpec {
    pub fn polar(radial_order: usize) -> Self {
        QuadratureSpec { radial_order, ..Self::default() }
    }

    pub fn mc(mc_samples: usize, seed: u64) -> Self {
        QuadratureSpec { mode: QuadMode::Mc, mc_samples, seed, ..Self::default() }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Polar: difference of two radial orders. MC: one standard error.
    pub error: f64,
}

/// Radial smoothness class of an integrand along one direction.
pub(crate) enum RadialShape {
    Smooth,
    /// Vanishes like (rho - r)^e at the boundary.
    BoundaryPower(f64),
}

/// Radius beyond which the (nonnegative, decaying) integrand contributes less
/// than 1e-18 of its near-center peak, probed over a fixed direction fan.
/// `inner` is a radius the support is known to reach (e.g. a shift length).
pub(crate) fn decay_radius(
    f: &dyn Fn(&Point) -> f64,
    n: usize,
    inner: f64,
) -> Result<f64> {
    let dirs: Vec<Point> = match n {
        1 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        2 => (0..64)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 64.0;
                [a.cos(), a.sin(), 0.0]
            })
            .collect(),
        _ => {
            let mut v = Vec::new();
            for ip in 0..16 {
                let c: f64 = -1.0 + 2.0 * (ip as f64 + 0.5) / 16.0;
                let s = (1.0 - c * c).max(0.0).sqrt();
                for ia in 0..16 {
                    let a = std::f64::consts::TAU * ia as f64 / 16.0;
                    v.push([s * a.cos(), s * a.sin(), c]);
                }
            }
            v
        }
    };
    let mut peak = 0.0f64;
    for s in [0.0, 0.5, 1.0] {
        for d in &dirs {
            let x = num::scale(d, s * (inner + 1.0));
            peak = peak.max(f(&x));
        }
    }
    let shell = |r: f64| match n {
        1 => 2.0,
        2 => std::f64::consts::TAU * r,
        _ => 2.0 * std::f64::consts::TAU * r * r,
    };
    let mut radius = inner + 2.0;
    while radius < 1e4 {
        let sup = dirs
            .iter()
            .map(|d| f(&num::scale(d, radius)))
            .fold(0.0, f64::max);
        if sup * shell(radius) * (1.0 + radius) < 1e-18 * (peak + 1e-300) {
            return Ok(radius);
        }
        radius *= 1.25;
    }
    Err(Error::NonFiniteIntegrand(
        "unbounded integrand does not decay against the weight".into(),
    ))
}

/// Integral of f(x) e^{-w(|x|)} dx over the body.
pub fn integrate_body<F>(
    f: F,
    body: &SymmetricBody,
    mu: &WeightedMeasure,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate>
where
    F: Fn(&Point) -> f64 + Sync,
{
    if body.dim() != mu.dim {
        return Err(Error::GridMismatch(format!(
            "body dimension {} vs measure dimension {}",
            body.dim(),
            mu.dim
        )));
    }
    match spec.mode {
        QuadMode::Polar => {
            polar::integrate(&f, &|_, _| RadialShape::Smooth, body, mu, spec.radial_order)
        }
        QuadMode::Mc => mc::integrate(&f, body, mu, spec.mc_samples, spec.seed, spec.stream),
    }
}

/// mu(K): the weight mass of the body.
pub fn measure_body(
    body: &SymmetricBody,
    mu: &WeightedMeasure,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    integrate_body(|_| 1.0, body, mu, spec)
}

/// Integral of Phi(t, x)^beta e^{-w(|x|)} dx over the body. Fractional
/// exponents of a cap vanishing on the boundary are handled with a Jacobi
/// rule per direction; the cap must be nonnegative on the body (sampled).
pub fn weighted_power_mass(
    body: &SymmetricBody,
    phi: &ConcaveFn,
    t: f64,
    beta: f64,
    mu: &WeightedMeasure,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    if phi.dim() != body.dim() {
        return Err(Error::GridMismatch(format!(
            "cap dimension {} vs body dimension {}",
            phi.dim(),
            body.dim()
        )));
    }
    if !beta.is_finite() {
        return Err(Error::UnsupportedBeta(format!("exponent {beta}")));
    }
    if beta == 0.0 {
        return measure_body(body, mu, spec);
    }
    let scale = phi.value(t, &num::ZERO3).abs() + 1.0;
    let table = body.radial_table();
    let dirs = body.grid().dirs();
    let step = (dirs.len() / 128).max(1);
    for (i, dir) in dirs.iter().enumerate().step_by(step) {
        for j in 1..=16 {
            let r = table[i] * j as f64 / 16.0;
            let v = phi.value(t, &num::scale(dir, r));
            if v < -1e-10 * scale {
                return Err(Error::NotNonnegative(format!(
                    "cap reaches {v} inside the section at t = {t}"
                )));
            }
        }
    }
    let fractional = beta.fract().abs() > 1e-12;
    let f = |x: &Point| phi.value(t, x).max(0.0).powf(beta);
    match spec.mode {
        QuadMode::Polar => {
            let shape = |theta: &Point, rho: f64| {
                if fractional && phi.value(t, &num::scale(theta, rho)).abs() <= 1e-8 * scale {
                    RadialShape::BoundaryPower(beta)
                } else {
                    RadialShape::Smooth
                }
            };
            polar::integrate(&f, &shape, body, mu, spec.radial_order)
        }
        QuadMode::Mc => mc::integrate(&f, body, mu, spec.mc_samples, spec.seed, spec.stream),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DirectionGrid;
    use crate::measures::RadialWeight;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn measure(w: RadialWeight, n: usize) -> WeightedMeasure {
        WeightedMeasure::new(w, n).unwrap()
    }

    fn grid(n: usize) -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::standard(n).unwrap())
    }

    #[test]
    fn interval_gaussian_mass_matches_erf() {
        let body = SymmetricBody::ball(grid(1), 1.0).unwrap();
        let mu = measure(RadialWeight::Gaussian, 1);
        let got = measure_body(&body, &mu, &QuadratureSpec::default()).unwrap();
        // sqrt(2 pi) erf(1/sqrt(2)).
        let want = 1.7112487837842973;
        assert_abs_diff_eq!(got.value, want, epsilon = 1e-12);
        assert!(got.error < 1e-10);
    }

    #[test]
    fn square_and_diamond_areas_are_exact() {
        let mu = measure(RadialWeight::Lebesgue, 2);
        let square = SymmetricBody::cuboid(grid(2), [1.0, 1.0, 0.0]).unwrap();
        let got = measure_body(&square, &mu, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(got.value, 4.0, epsilon = 1e-12);

        let diamond =
            SymmetricBody::polytope(grid(2), vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let got = measure_body(&diamond, &mu, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(got.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ball_volume_in_three_dimensions() {
        let mu = measure(RadialWeight::Lebesgue, 3);
        let ball = SymmetricBody::ball(grid(3), 1.0).unwrap();
        let got = measure_body(&ball, &mu, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(got.value, 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn fractional_cap_power_uses_boundary_rule() {
        // int over the unit disc of (1 - r^2)^{1/2} = 2 pi / 3.
        let body = SymmetricBody::ball(grid(2), 1.0).unwrap();
        let phi = ConcaveFn::radial_quad_cap(1.0, 0.0, 0.0, 1.0, 2).unwrap();
        let mu = measure(RadialWeight::Lebesgue, 2);
        let got = weighted_power_mass(&body, &phi, 0.0, 0.5, &mu, &QuadratureSpec::default())
            .unwrap();
        assert_abs_diff_eq!(got.value, 2.0 * std::f64::consts::PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn integer_cap_power_on_disc() {
        // int over the unit disc of (2 - r^2) = 3 pi / 2.
        let body = SymmetricBody::ball(grid(2), 1.0).unwrap();
        let phi = ConcaveFn::radial_quad_cap(2.0, 0.0, 0.0, 1.0, 2).unwrap();
        let mu = measure(RadialWeight::Lebesgue, 2);
        let got =
            weighted_power_mass(&body, &phi, 0.0, 1.0, &mu, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(got.value, 1.5 * std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn negative_cap_is_rejected() {
        let body = SymmetricBody::ball(grid(1), 2.0).unwrap();
        let phi = ConcaveFn::radial_quad_cap(1.0, 0.0, 0.0, 1.0, 1).unwrap();
        let mu = measure(RadialWeight::Lebesgue, 1);
        let err =
            weighted_power_mass(&body, &phi, 0.0, 0.5, &mu, &QuadratureSpec::default());
        assert!(matches!(err, Err(Error::NotNonnegative(_))));
    }

    #[test]
    fn mc_square_area_within_error_bars_and_deterministic() {
        // A square, not a disc: the bounding ball of a disc is the disc, so
        // every sample would land inside and the variance would vanish.
        let body = SymmetricBody::cuboid(grid(2), [1.0, 1.0, 0.0]).unwrap();
        let mu = measure(RadialWeight::Lebesgue, 2);
        let spec = QuadratureSpec::mc(200_000, 7);
        let a = measure_body(&body, &mu, &spec).unwrap();
        let b = measure_body(&body, &mu, &spec).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.error > 0.0);
        assert!((a.value - 4.0).abs() < 4.0 * a.error);
        let other = measure_body(&body, &mu, &QuadratureSpec::mc(200_000, 8)).unwrap();
        assert_ne!(a.value, other.value);
    }

    #[test]
    fn shifted_indicator_field_matches_erf_difference() {
        let ball = Arc::new(SymmetricBody::ball(grid(1), 1.0).unwrap());
        let field = Field::indicator(ball, [3.0, 0.0, 0.0]);
        let mu = measure(RadialWeight::Gaussian, 1);
        let got = integrate_field(&field, &mu, &QuadratureSpec::default()).unwrap();
        // sqrt(pi/2) (erf(4/sqrt(2)) - erf(2/sqrt(2))).
        let want = 5.6946735962620468e-2;
        assert_abs_diff_eq!(got.value, want, epsilon = 1e-12);

        let mc = integrate_field(&field, &mu, &QuadratureSpec::mc(400_000, 3)).unwrap();
        assert!((mc.value - want).abs() < 4.0 * mc.error);
    }

    #[test]
    fn quad_exp_field_integrates_a_full_gaussian() {
        let field =
            Field::quad_exp(num::MAT3_ZERO, num::ZERO3, num::ZERO3, 1.0, 2).unwrap();
        // Flat profile, gaussian weight: total mass 2 pi.
        let mu = measure(RadialWeight::Gaussian, 2);
        let got = integrate_field(&field, &mu, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(got.value, std::f64::consts::TAU, epsilon = 1e-8);
    }

    #[test]
    fn quad_exp_needs_decay() {
        let field = Field::quad_exp(num::MAT3_ZERO, num::ZERO3, num::ZERO3, 1.0, 2).unwrap();
        let mu = measure(RadialWeight::Lebesgue, 2);
        assert!(matches!(
            integrate_field(&field, &mu, &QuadratureSpec::default()),
            Err(Error::NonFiniteIntegrand(_))
        ));
    }
}
