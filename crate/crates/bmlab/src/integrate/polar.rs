//! Polar quadrature over star-shaped regions: per-direction radial rules
//! combined with an angular rule matched to the body's smoothness.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use crate::geometry::SymmetricBody;
use crate::measures::WeightedMeasure;
use crate::num::{self, gauss};
use crate::{Error, Point, Result};

use super::{IntegralEstimate, RadialShape};

/// Widest angular panel between radial kinks.
const PANEL_ARC: f64 = PI / 8.0;
/// Gauss nodes per angular panel.
const PANEL_ORDER: usize = 24;

/// Gauss-Jacobi rules are expensive to build; one integral reuses a single
/// exponent many times, so cache per pass.
struct GjCache {
    p: usize,
    rules: HashMap<u64, Vec<(f64, f64)>>,
}

impl GjCache {
    fn new(p: usize) -> Self {
        GjCache { p, rules: HashMap::new() }
    }

    fn rule(&mut self, e: f64) -> &[(f64, f64)] {
        let p = self.p;
        self.rules
            .entry(e.to_bits())
            .or_insert_with(|| gauss::gauss_jacobi(p, e, 0.0))
    }
}

/// Integrate f(x) e^{-w(|x|)} over the body. The value is taken from the
/// doubled radial order and the error from the difference of the two passes.
pub(crate) fn integrate(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    shape_for: &(dyn Fn(&Point, f64) -> RadialShape + Sync),
    body: &SymmetricBody,
    mu: &WeightedMeasure,
    order: usize,
) -> Result<IntegralEstimate> {
    let coarse = pass(f, shape_for, body, mu, order)?;
    let fine = pass(f, shape_for, body, mu, 2 * order)?;
    let error = (fine - coarse).abs().max(4.0 * f64::EPSILON * fine.abs());
    Ok(IntegralEstimate { value: fine, error })
}

fn pass(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    shape_for: &(dyn Fn(&Point, f64) -> RadialShape + Sync),
    body: &SymmetricBody,
    mu: &WeightedMeasure,
    p: usize,
) -> Result<f64> {
    let mut gj = GjCache::new(p);
    match body.dim() {
        1 => {
            let mut total = 0.0;
            for sgn in [1.0f64, -1.0] {
                let theta = [sgn, 0.0, 0.0];
                total += radial_segment(f, shape_for, body, mu, &theta, p, &mut gj)?;
            }
            Ok(total)
        }
        2 => match body.angular_kinks() {
            Some(kinks) => {
                let mut total = 0.0;
                for (a, w) in panel_nodes(&kinks) {
                    let theta = [a.cos(), a.sin(), 0.0];
                    total += w * radial_segment(f, shape_for, body, mu, &theta, p, &mut gj)?;
                }
                Ok(total)
            }
            None => grid_pass(f, shape_for, body, mu, p, &mut gj),
        },
        _ => grid_pass(f, shape_for, body, mu, p, &mut gj),
    }
}

fn grid_pass(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    shape_for: &(dyn Fn(&Point, f64) -> RadialShape + Sync),
    body: &SymmetricBody,
    mu: &WeightedMeasure,
    p: usize,
    gj: &mut GjCache,
) -> Result<f64> {
    let grid = body.grid();
    let mut total = 0.0;
    for (theta, &w) in grid.dirs().iter().zip(grid.weights()) {
        total += w * radial_segment(f, shape_for, body, mu, theta, p, gj)?;
    }
    Ok(total)
}

/// Angular nodes and weights: Gauss panels between consecutive kink angles,
/// long arcs subdivided so no panel exceeds PANEL_ARC.
fn panel_nodes(kinks: &[f64]) -> Vec<(f64, f64)> {
    let mut brk: Vec<f64> = kinks.iter().map(|a| a.rem_euclid(TAU)).collect();
    brk.push(0.0);
    brk.sort_by(f64::total_cmp);
    brk.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let m = brk.len();
    let rule = gauss::gauss_legendre(PANEL_ORDER);
    let mut out = Vec::new();
    for i in 0..m {
        let a0 = brk[i];
        let a1 = if i + 1 == m { brk[0] + TAU } else { brk[i + 1] };
        let span = a1 - a0;
        if span < 1e-12 {
            continue;
        }
        let parts = (span / PANEL_ARC).ceil() as usize;
        let h = span / parts as f64;
        for k in 0..parts {
            let lo = a0 + k as f64 * h;
            for &(x, w) in rule {
                out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
            }
        }
    }
    out
}

fn radial_segment(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    shape_for: &(dyn Fn(&Point, f64) -> RadialShape + Sync),
    body: &SymmetricBody,
    mu: &WeightedMeasure,
    theta: &Point,
    p: usize,
    gj: &mut GjCache,
) -> Result<f64> {
    let rho = body.radial(theta);
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::NotPositive(format!(
            "radial function {rho} along ({}, {}, {})",
            theta[0], theta[1], theta[2]
        )));
    }
    let n = body.dim() as i32;
    let g = |r: f64| {
        let x = num::scale(theta, r);
        f(&x) * (-mu.weight.w(r)).exp() * r.powi(n - 1)
    };
    let val = match shape_for(theta, rho) {
        RadialShape::Smooth => gl_segment(&g, 0.0, rho, p),
        RadialShape::BoundaryPower(e) => {
            if e <= -1.0 {
                return Err(Error::NonFiniteIntegrand(format!(
                    "boundary exponent {e} is not integrable"
                )));
            }
            // Plain Gauss on the inner half, then a Jacobi rule absorbing the
            // (rho - r)^e factor on the boundary half.
            let mid = 0.5 * rho;
            let left = gl_segment(&g, 0.0, mid, p);
            let h = rho - mid;
            let mut right = 0.0;
            for &(x, w) in gj.rule(e) {
                let r = mid + 0.5 * h * (x + 1.0);
                right += w * g(r) * (h / (2.0 * (rho - r))).powf(e);
            }
            left + 0.5 * h * right
        }
    };
    if !val.is_finite() {
        return Err(Error::NonFiniteIntegrand(format!(
            "radial integral along ({}, {}, {})",
            theta[0], theta[1], theta[2]
        )));
    }
    Ok(val)
}

fn gl_segment(g: &dyn Fn(f64) -> f64, a: f64, b: f64, p: usize) -> f64 {
    let rule = gauss::gauss_legendre(p);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    rule.iter().map(|&(x, w)| w * g(c + h * x)).sum::<f64>() * h
}
