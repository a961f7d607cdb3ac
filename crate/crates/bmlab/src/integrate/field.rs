//! Nonnegative integrands over all of R^n: translated indicators, powers of
//! concave caps on a translated body, and quadratic-exponential profiles.
//! These are the test functions fed to the integral-inequality checkers.

use std::sync::Arc;

use crate::geometry::{ConcaveFn, SymmetricBody};
use crate::measures::{RadialWeight, WeightedMeasure};
use crate::num;
use crate::{Error, Mat3, Point, Result};

use super::{mc, polar, IntegralEstimate, QuadMode, QuadratureSpec, RadialShape};

#[derive(Clone)]
pub enum Field {
    /// Indicator of body + shift.
    Indicator { body: Arc<SymmetricBody>, shift: Point },
    /// max(Phi(t, x - shift), 0)^beta restricted to body + shift.
    CapPow {
        body: Arc<SymmetricBody>,
        shift: Point,
        cap: Arc<ConcaveFn>,
        t: f64,
        beta: f64,
    },
    /// amp * exp(-(<y, Q y>/2 + <b, y>)) with y = x - shift.
    QuadExp { q: Mat3, b: Point, shift: Point, amp: f64, dim: usize },
}

impl Field {
    pub fn indicator(body: Arc<SymmetricBody>, shift: Point) -> Field {
        Field::Indicator { body, shift }
    }

    pub fn cap_pow(
        body: Arc<SymmetricBody>,
        shift: Point,
        cap: Arc<ConcaveFn>,
        t: f64,
        beta: f64,
    ) -> Result<Field> {
        if cap.dim() != body.dim() {
            return Err(Error::GridMismatch(format!(
                "cap dimension {} vs body dimension {}",
                cap.dim(),
                body.dim()
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::UnsupportedBeta(format!("cap power exponent {beta}")));
        }
        Ok(Field::CapPow { body, shift, cap: cap.clone(), t, beta })
    }

    pub fn quad_exp(mut q: Mat3, b: Point, shift: Point, amp: f64, dim: usize) -> Result<Field> {
        if !(1..=3).contains(&dim) {
            return Err(Error::OutOfRange(format!("dimension {dim} not in 1..=3")));
        }
        if !(amp > 0.0 && amp.is_finite()) {
            return Err(Error::NotPositive(format!("field amplitude {amp}")));
        }
        for i in 0..3 {
            for j in 0..3 {
                if i >= dim || j >= dim {
                    q[i][j] = 0.0;
                }
            }
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let s = 0.5 * (q[i][j] + q[j][i]);
                q[i][j] = s;
                q[j][i] = s;
            }
        }
        Ok(Field::QuadExp { q, b, shift, amp, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Field::Indicator { body, .. } => body.dim(),
            Field::CapPow { body, .. } => body.dim(),
            Field::QuadExp { dim, .. } => *dim,
        }
    }

    pub fn shift(&self) -> &Point {
        match self {
            Field::Indicator { shift, .. }
            | Field::CapPow { shift, .. }
            | Field::QuadExp { shift, .. } => shift,
        }
    }

    /// Same profile moved by v.
    pub fn translated(&self, v: &Point) -> Field {
        let mut out = self.clone();
        match &mut out {
            Field::Indicator { shift, .. }
            | Field::CapPow { shift, .. }
            | Field::QuadExp { shift, .. } => *shift = num::add(shift, v),
        }
        out
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            Field::Indicator { body, shift } => {
                let y = num::sub(x, shift);
                if body.contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
            Field::CapPow { body, shift, cap, t, beta } => {
                let y = num::sub(x, shift);
                if body.contains(&y) {
                    cap.value(*t, &y).max(0.0).powf(*beta)
                } else {
                    0.0
                }
            }
            Field::QuadExp { q, b, shift, amp, .. } => {
                let y = num::sub(x, shift);
                amp * (-(0.5 * num::quad_form(q, &y) + num::dot(b, &y))).exp()
            }
        }
    }

    /// Ball containing the support, when it is bounded.
    pub fn support_ball(&self) -> Option<(Point, f64)> {
        match self {
            Field::Indicator { body, shift } => Some((*shift, body.circumradius())),
            Field::CapPow { body, shift, .. } => Some((*shift, body.circumradius())),
            Field::QuadExp { .. } => None,
        }
    }
}

/// Integral of the field against e^{-W}. Bounded supports integrate in local
/// polar coordinates around their own center; quadratic-exponential profiles
/// integrate over a ball large enough that the truncated tail is negligible.
pub fn integrate_field(
    field: &Field,
    mu: &WeightedMeasure,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    if field.dim() != mu.dim {
        return Err(Error::GridMismatch(format!(
            "field dimension {} vs measure dimension {}",
            field.dim(),
            mu.dim
        )));
    }
    match field {
        Field::Indicator { body, shift } => {
            bounded_field(field, body, shift, &|_, _| RadialShape::Smooth, mu, spec)
        }
        Field::CapPow { body, shift, cap, t, beta } => {
            let fractional = beta.fract().abs() > 1e-12;
            let scale = cap.value(*t, &num::ZERO3).abs() + 1.0;
            let cap = cap.clone();
            let t = *t;
            let beta = *beta;
            let shape = move |theta: &Point, rho: f64| {
                if fractional && cap.value(t, &num::scale(theta, rho)).abs() <= 1e-8 * scale {
                    RadialShape::BoundaryPower(beta)
                } else {
                    RadialShape::Smooth
                }
            };
            bounded_field(field, body, shift, &shape, mu, spec)
        }
        Field::QuadExp { dim, .. } => {
            let radius = truncation_radius(field, mu)?;
            match spec.mode {
                QuadMode::Polar => {
                    let grid = probe_grid(*dim)?;
                    let ball = SymmetricBody::ball(grid, radius)?;
                    let f = |x: &Point| field.value(x);
                    polar::integrate(&f, &|_, _| RadialShape::Smooth, &ball, mu, spec.radial_order)
                }
                QuadMode::Mc => {
                    let f = |x: &Point| field.value(x) * mu.density(x);
                    mc::ball_mc(&f, &num::ZERO3, radius, *dim, spec.mc_samples, spec.seed, spec.stream)
                }
            }
        }
    }
}

/// Local polar integration around the support center. The measure weight
/// rides inside the integrand, so the engine runs with a flat weight.
fn bounded_field(
    field: &Field,
    body: &SymmetricBody,
    shift: &Point,
    shape_for: &(dyn Fn(&Point, f64) -> RadialShape + Sync),
    mu: &WeightedMeasure,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    match spec.mode {
        QuadMode::Polar => {
            let flat = WeightedMeasure::new(RadialWeight::Lebesgue, mu.dim)?;
            let f = |y: &Point| {
                let x = num::add(shift, y);
                field.value(&x) * mu.density(&x)
            };
            polar::integrate(&f, shape_for, body, &flat, spec.radial_order)
        }
        QuadMode::Mc => {
            let f = |x: &Point| field.value(x) * mu.density(x);
            mc::ball_mc(
                &f,
                shift,
                body.circumradius(),
                body.dim(),
                spec.mc_samples,
                spec.seed,
                spec.stream,
            )
        }
    }
}

fn probe_grid(dim: usize) -> Result<std::sync::Arc<crate::geometry::DirectionGrid>> {
    Ok(std::sync::Arc::new(crate::geometry::DirectionGrid::standard(dim)?))
}

fn truncation_radius(field: &Field, mu: &WeightedMeasure) -> Result<f64> {
    let f = |x: &Point| field.value(x) * mu.density(x);
    super::decay_radius(&f, field.dim(), num::norm(field.shift()))
}
