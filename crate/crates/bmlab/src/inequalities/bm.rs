//! Dimensional Brunn-Minkowski check for weighted power masses:
//! nu(lambda K + (1 - lambda) L)^gamma against the lambda-mix of the
//! endpoint masses, gamma = 1 / (beta + n).

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::spec_types::{standard_grid, BodySpec, CapSpec, QuadOpts, WeightSpec};
use super::{
    instance_rng, parse_params, settle_verdict, Check, CheckReport, TheoremStatus,
};
use crate::geometry::minkowski_combine;
use crate::integrate::{weighted_power_mass, QuadratureSpec};
use crate::measures::validate_weight;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimBmParams {
    dim: usize,
    k: BodySpec,
    l: BodySpec,
    lambda: f64,
    #[serde(default = "default_cap")]
    cap: CapSpec,
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default = "default_weight")]
    weight: WeightSpec,
    #[serde(default)]
    quad: QuadOpts,
}

fn default_cap() -> CapSpec {
    CapSpec::One
}

fn default_beta() -> f64 {
    1.0
}

fn default_weight() -> WeightSpec {
    WeightSpec::Lebesgue
}

/// nu(C)^gamma >= lambda nu(K)^gamma + (1 - lambda) nu(L)^gamma with
/// C the Minkowski combination of K and L.
pub struct DimBm;

fn masses(p: &DimBmParams, spec: &QuadratureSpec) -> Result<(f64, f64, f64)> {
    let grid = standard_grid(p.dim)?;
    let k = p.k.build(grid.clone())?;
    let l = p.l.build(grid)?;
    let c = minkowski_combine(&k, &l, p.lambda)?;
    let cap = p.cap.build(p.dim)?;
    let mu = p.weight.measure(p.dim)?;
    let gamma = 1.0 / (p.beta + p.dim as f64);

    let nk = weighted_power_mass(&k, &cap, 0.0, p.beta, &mu, spec)?;
    let nl = weighted_power_mass(&l, &cap, 0.0, p.beta, &mu, spec)?;
    let nc = weighted_power_mass(&c, &cap, 0.0, p.beta, &mu, spec)?;
    for est in [&nk, &nl, &nc] {
        if est.value <= 0.0 {
            return Err(Error::EmptyBody(format!("power mass {}", est.value)));
        }
    }

    let margin = nc.value.powf(gamma)
        - p.lambda * nk.value.powf(gamma)
        - (1.0 - p.lambda) * nl.value.powf(gamma);
    let deriv = |v: f64, e: f64| gamma * v.powf(gamma - 1.0) * e;
    let err = deriv(nc.value, nc.error)
        + p.lambda * deriv(nk.value, nk.error)
        + (1.0 - p.lambda) * deriv(nl.value, nl.error);
    Ok((margin, err, nc.value.powf(gamma)))
}

impl Check for DimBm {
    fn name(&self) -> &'static str {
        "dim_bm"
    }

    fn default_params(&self) -> Value {
        serde_json::json!({
            "dim": 1,
            "k": { "shape": "ball", "radius": 1.0 },
            "l": { "shape": "ball", "radius": 0.5 },
            "lambda": 0.5,
        })
    }

    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value {
        let mut rng = instance_rng(self.name(), seed, index);
        let k = BodySpec::random(&mut rng, dim);
        let l = BodySpec::random(&mut rng, dim);
        let reach = k.circumradius().max(l.circumradius());
        let cap = CapSpec::random_positive(&mut rng, reach);
        let beta = *[0.0, 0.5, 1.0, 2.0]
            .get(rng.random_range(0..4usize))
            .expect("beta table");
        let weight = WeightSpec::random(&mut rng);
        serde_json::json!({
            "dim": dim,
            "k": k,
            "l": l,
            "lambda": rng.random_range(0.2..0.8),
            "cap": cap,
            "beta": beta,
            "weight": weight,
        })
    }

    fn run(&self, params: &Value) -> Result<CheckReport> {
        let p: DimBmParams = parse_params(params)?;
        if p.dim == 0 || p.dim > 3 {
            return Err(Error::OutOfRange(format!("dimension {} not in 1..=3", p.dim)));
        }
        if !(0.0..=1.0).contains(&p.lambda) {
            return Err(Error::OutOfRange(format!("lambda {} not in [0, 1]", p.lambda)));
        }
        if !(p.beta >= 0.0 && p.beta.is_finite()) {
            return Err(Error::UnsupportedBeta(format!("beta {} must be finite and >= 0", p.beta)));
        }
        let cert = validate_weight(&p.weight.build()?)?;
        let hypothesis_ok = cert.admissible;

        let (margin, err, lhs) = masses(&p, &p.quad.spec())?;
        let tolerance = 10.0 * err;
        let verdict = settle_verdict(margin, tolerance, || {
            let (m2, e2, _) = masses(&p, &p.quad.cross_spec())?;
            Ok((m2, 10.0 * e2))
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
            lhs,
            rhs: lhs - margin,
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
    fn equal_bodies_are_exactly_flat() {
        // Cuboid combinations stay in the cuboid family, so the midpoint of
        // a body with itself reproduces the same mass bit for bit.
        let params = serde_json::json!({
            "dim": 2,
            "k": { "shape": "cuboid", "half_widths": [1.0, 0.7] },
            "l": { "shape": "cuboid", "half_widths": [1.0, 0.7] },
            "lambda": 0.5,
            "beta": 1.0,
            "cap": { "kind": "radial_quad", "c": 2.0, "b": 0.5 },
            "weight": { "family": "gaussian" },
        });
        let report = DimBm.run(&params).unwrap();
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-10);
        assert_eq!(report.verdict, Verdict::Holds);
        assert_eq!(report.theorem_status, TheoremStatus::Theorem);
    }

    #[test]
    fn gaussian_interval_margin_matches_error_function_values() {
        // Unweighted cap, beta = 1, n = 1, Gaussian weight. The three masses
        // are sqrt(2 pi) times the standard normal measures of [-1, 1],
        // [-2, 2], and their midpoint combination [-1.5, 1.5].
        let params = serde_json::json!({
            "dim": 1,
            "k": { "shape": "cuboid", "half_widths": [1.0] },
            "l": { "shape": "cuboid", "half_widths": [2.0] },
            "lambda": 0.5,
            "beta": 1.0,
            "weight": { "family": "gaussian" },
        });
        let report = DimBm.run(&params).unwrap();
        let p1 = 0.682_689_492_137_085_9_f64;
        let p2 = 0.954_499_736_103_641_6_f64;
        let p15 = 0.866_385_597_462_283_8_f64;
        let scale = (2.0 * std::f64::consts::PI).sqrt().sqrt();
        let expected = scale * (p15.sqrt() - 0.5 * p1.sqrt() - 0.5 * p2.sqrt());
        assert_abs_diff_eq!(report.margin, expected, epsilon = 1e-8);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn lebesgue_homothets_saturate() {
        let params = serde_json::json!({
            "dim": 2,
            "k": { "shape": "cuboid", "half_widths": [0.6, 0.8] },
            "l": { "shape": "cuboid", "half_widths": [1.2, 1.6] },
            "lambda": 0.3,
            "beta": 0.0,
        });
        let report = DimBm.run(&params).unwrap();
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-9);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn fractional_beta_with_vanishing_cap_runs() {
        // Cap touches zero on the body boundary; the fractional power is
        // still integrable.
        let params = serde_json::json!({
            "dim": 1,
            "k": { "shape": "ball", "radius": 1.0 },
            "l": { "shape": "ball", "radius": 1.0 },
            "lambda": 0.5,
            "beta": 0.5,
            "cap": { "kind": "radial_quad", "c": 1.0, "b": 1.0 },
        });
        let report = DimBm.run(&params).unwrap();
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-8);
    }
}
