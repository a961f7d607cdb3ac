//! Weighted Poincare check: for even test functions against the cap-power
//! probability measure on a convex body, the inverse-curvature energy of
//! g = f * cap plus a dimensional mean term dominates (beta - 1) times the
//! variance.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::spec_types::{standard_grid, BodySpec, CapSpec, PolyTestFn, QuadOpts, WeightSpec};
use super::{
    instance_rng, parse_params, ratio_err, settle_verdict, Check, CheckReport, TheoremStatus,
};
use crate::integrate::{integrate_body, weighted_power_mass, QuadratureSpec};
use crate::measures::validate_weight;
use crate::num;
use crate::{Error, Point, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoincareParams {
    dim: usize,
    c: BodySpec,
    cap: CapSpec,
    beta: f64,
    f: PolyTestFn,
    #[serde(default = "default_weight")]
    weight: WeightSpec,
    #[serde(default)]
    quad: QuadOpts,
}

fn default_weight() -> WeightSpec {
    WeightSpec::Lebesgue
}

/// (beta - 1) Var(f) <= int <(-Hess cap)^{-1} grad(f cap), grad(f cap)> / cap
/// + n / (beta + n) * mean(f)^2, all against the cap^beta weight. The
/// quadratic form on the right carries the INVERSE cap Hessian: that is what
/// the t^2-penalty construction behind the inequality produces, it is the
/// only reading invariant under rescaling the cap, and a flat cap makes the
/// right side infinite rather than zero.
pub struct Poincare;

fn cap_grad(cap: &CapSpec, x: &Point) -> Point {
    match *cap {
        CapSpec::One | CapSpec::Constant { .. } => num::ZERO3,
        CapSpec::RadialQuad { b, .. } => num::scale(x, -2.0 * b),
        CapSpec::Power { s, p, .. } => {
            let r = num::norm(x);
            if r == 0.0 {
                return num::ZERO3;
            }
            num::scale(x, -(p / s.powf(p)) * r.powf(p - 2.0))
        }
    }
}

/// The q > 0 with -Hess cap = q * Id, for caps whose curvature is uniform.
/// Inverting the Hessian needs exactly this class: flat caps have nothing to
/// invert and power caps with p != 2 degenerate at the origin.
fn uniform_curvature(cap: &CapSpec) -> Option<f64> {
    match *cap {
        CapSpec::RadialQuad { b, .. } if b > 0.0 => Some(2.0 * b),
        CapSpec::Power { s, p, .. } if p == 2.0 => Some(2.0 / (s * s)),
        _ => None,
    }
}

struct Sides {
    lhs: f64,
    rhs: f64,
    err: f64,
}

fn sides(p: &PoincareParams, q: f64, spec: &QuadratureSpec) -> Result<Sides> {
    let body = p.c.build(standard_grid(p.dim)?)?;
    let cap_fn = p.cap.build(p.dim)?;
    let mu = p.weight.measure(p.dim)?;
    let n = p.dim as f64;

    let z = weighted_power_mass(&body, &cap_fn, 0.0, p.beta, &mu, spec)?;
    let cap = p.cap;
    let f = p.f.clone();
    let beta = p.beta;
    let phi = move |x: &Point| cap.value_at_radius(num::norm(x));
    let i1 = integrate_body(|x| f.value(x) * phi(x).powf(beta), &body, &mu, spec)?;
    let i2 = integrate_body(|x| f.value(x).powi(2) * phi(x).powf(beta), &body, &mu, spec)?;
    let r1 = integrate_body(
        |x| {
            let pv = phi(x);
            let mut grad_g = num::scale(&f.grad(x), pv);
            let fg = f.value(x);
            let cg = cap_grad(&cap, x);
            for d in 0..3 {
                grad_g[d] += fg * cg[d];
            }
            num::dot(&grad_g, &grad_g) / q * pv.powf(beta - 1.0)
        },
        &body,
        &mu,
        spec,
    )?;

    if z.value <= 0.0 {
        return Err(Error::EmptyBody(format!("cap power mass {}", z.value)));
    }
    let mean = i1.value / z.value;
    let var = i2.value / z.value - mean * mean;
    let lhs = (p.beta - 1.0) * var;
    let rhs = r1.value / z.value + n / (p.beta + n) * mean * mean;

    let mean_err = ratio_err(i1.value, i1.error, z.value, z.error);
    let err = (p.beta - 1.0).abs()
        * (ratio_err(i2.value, i2.error, z.value, z.error) + 2.0 * mean.abs() * mean_err)
        + ratio_err(r1.value, r1.error, z.value, z.error)
        + n / (p.beta + n) * 2.0 * mean.abs() * mean_err;
    Ok(Sides { lhs, rhs, err })
}

impl Check for Poincare {
    fn name(&self) -> &'static str {
        "poincare"
    }

    fn default_params(&self) -> Value {
        serde_json::json!({
            "dim": 1,
            "c": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "radial_quad", "c": 1.0, "b": 1.0 },
            "beta": 2.0,
            "f": { "squares": [{ "coef": 1.0, "dir": [1.0] }] },
        })
    }

    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value {
        let mut rng = instance_rng(self.name(), seed, index);
        let c = BodySpec::random(&mut rng, dim);
        let reach = c.circumradius();
        let cap = if rng.random_range(0..2u8) == 0 {
            let s: f64 = rng.random_range(0.8..2.0);
            CapSpec::Power {
                c: (reach / s).powi(2) + rng.random_range(0.2..1.0),
                s,
                p: 2.0,
            }
        } else {
            let b = rng.random_range(0.1..1.0);
            CapSpec::RadialQuad { c: b * reach * reach + rng.random_range(0.2..1.0), b }
        };
        let weight = WeightSpec::random(&mut rng);
        serde_json::json!({
            "dim": dim,
            "c": c,
            "cap": cap,
            "beta": rng.random_range(1.0..3.0),
            "f": PolyTestFn::random_even(&mut rng, dim),
            "weight": weight,
        })
    }

    fn run(&self, params: &Value) -> Result<CheckReport> {
        let p: PoincareParams = parse_params(params)?;
        if p.dim == 0 || p.dim > 3 {
            return Err(Error::OutOfRange(format!("dimension {} not in 1..=3", p.dim)));
        }
        if !(p.beta >= 1.0 && p.beta.is_finite()) {
            return Err(Error::UnsupportedBeta(format!("beta {} must be finite and >= 1", p.beta)));
        }
        p.f.validate(p.dim)?;
        if !p.f.is_even() {
            return Err(Error::NotEven("test function has odd terms".into()));
        }
        let q = uniform_curvature(&p.cap).ok_or_else(|| {
            Error::NotConcave(
                "cap must be uniformly strictly concave (radial_quad with b > 0 or power with p = 2)"
                    .into(),
            )
        })?;
        let cert = validate_weight(&p.weight.build()?)?;
        let hypothesis_ok = cert.admissible;

        let s = sides(&p, q, &p.quad.spec())?;
        let margin = s.rhs - s.lhs;
        let tolerance = 10.0 * s.err;
        let verdict = settle_verdict(margin, tolerance, || {
            let s2 = sides(&p, q, &p.quad.cross_spec())?;
            Ok((s2.rhs - s2.lhs, 10.0 * s2.err))
        })?;

        Ok(CheckReport {
            name: self.name().to_string(),
            margin,
            tolerance,
            verdict,
            theorem_status: if hypothesis_ok {
                TheoremStatus::Theorem
            } else {
                TheoremStatus::Exploratory
            },
            hypothesis_ok,
            lhs: s.lhs,
            rhs: s.rhs,
            witness: serde_json::to_value(&p).expect("params serialize"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::Verdict;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parabola_cap_square_test_function_margin_is_exact() {
        // C = [-1, 1], cap 1 - x^2, beta = 2, f = x^2, flat weight. All
        // integrals are rational: Z = 16/15, mean = 1/7, Var = 4/147,
        // energy term = (8/63) / Z = 5/42, so the margin is
        // 5/42 + 1/147 - 4/147 = 29/294.
        let report = Poincare.run(&Poincare.default_params()).unwrap();
        assert_abs_diff_eq!(report.margin, 29.0 / 294.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.lhs, 4.0 / 147.0, epsilon = 1e-8);
        assert_eq!(report.verdict, Verdict::Holds);
        assert_eq!(report.theorem_status, TheoremStatus::Theorem);
    }

    #[test]
    fn constant_test_function_keeps_only_the_mean_term() {
        // f = 1: variance drops and grad g = grad cap, so the energy term is
        // int 2x^2 (1 - x^2) dx / Z = (8/15) / (16/15) = 1/2, plus 1/3 from
        // the mean term.
        let params = serde_json::json!({
            "dim": 1,
            "c": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "radial_quad", "c": 1.0, "b": 1.0 },
            "beta": 2.0,
            "f": { "constant": 1.0 },
        });
        let report = Poincare.run(&params).unwrap();
        assert_abs_diff_eq!(report.margin, 5.0 / 6.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.lhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn beta_one_has_no_variance_side() {
        let params = serde_json::json!({
            "dim": 2,
            "c": { "shape": "ellipsoid", "semi_axes": [1.0, 0.8] },
            "cap": { "kind": "radial_quad", "c": 2.0, "b": 0.7 },
            "beta": 1.0,
            "f": { "squares": [{ "coef": 1.0, "dir": [0.6, 0.8] }] },
            "weight": { "family": "gaussian" },
        });
        let report = Poincare.run(&params).unwrap();
        assert_abs_diff_eq!(report.lhs, 0.0, epsilon = 1e-12);
        assert!(report.margin >= 0.0);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn power_two_caps_match_the_equivalent_radial_quad() {
        let with = |cap: Value| {
            serde_json::json!({
                "dim": 1,
                "c": { "shape": "ball", "radius": 1.0 },
                "cap": cap,
                "beta": 2.0,
                "f": { "squares": [{ "coef": 1.0, "dir": [1.0] }] },
            })
        };
        let a = Poincare
            .run(&with(serde_json::json!({ "kind": "power", "c": 1.0, "s": 1.0, "p": 2.0 })))
            .unwrap();
        let b = Poincare
            .run(&with(serde_json::json!({ "kind": "radial_quad", "c": 1.0, "b": 1.0 })))
            .unwrap();
        assert_abs_diff_eq!(a.margin, b.margin, epsilon = 1e-12);
    }

    #[test]
    fn flat_caps_are_rejected() {
        let params = serde_json::json!({
            "dim": 1,
            "c": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "constant", "value": 1.0 },
            "beta": 2.0,
            "f": { "squares": [{ "coef": 1.0, "dir": [1.0] }] },
        });
        assert_eq!(Poincare.run(&params).unwrap_err().code(), "NOT_CONCAVE");
        let params = serde_json::json!({
            "dim": 1,
            "c": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "power", "c": 1.0, "s": 1.0, "p": 3.0 },
            "beta": 2.0,
            "f": { "squares": [{ "coef": 1.0, "dir": [1.0] }] },
        });
        assert_eq!(Poincare.run(&params).unwrap_err().code(), "NOT_CONCAVE");
    }

    #[test]
    fn odd_test_functions_are_rejected() {
        let params = serde_json::json!({
            "dim": 1,
            "c": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "one" },
            "beta": 2.0,
            "f": { "linear": [1.0] },
        });
        let err = Poincare.run(&params).unwrap_err();
        assert_eq!(err.code(), "NOT_EVEN");
    }

    #[test]
    fn low_beta_is_unsupported() {
        let params = serde_json::json!({
            "dim": 1,
            "c": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "one" },
            "beta": 0.5,
            "f": { "constant": 1.0 },
        });
        let err = Poincare.run(&params).unwrap_err();
        assert_eq!(err.code(), "UNSUPPORTED_BETA");
    }
}
