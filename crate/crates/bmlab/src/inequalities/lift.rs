//! Transference check: the cap-power mass of a body equals, up to the unit
//! ball volume in the fiber dimension, the product measure of the lifted
//! body whose fiber over x is the centered beta-ball of radius cap(x).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::spec_types::{standard_grid, BodySpec, CapSpec, WeightSpec};
use super::{instance_rng, parse_params, settle_verdict, Check, CheckReport, TheoremStatus};
use crate::integrate::{weighted_power_mass, QuadratureSpec};
use crate::num;
use crate::{Error, Point, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LiftParams {
    dim: usize,
    k: BodySpec,
    #[serde(default = "default_cap")]
    cap: CapSpec,
    beta: u32,
    #[serde(default = "default_weight")]
    weight: WeightSpec,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default)]
    seed: u64,
}

fn default_cap() -> CapSpec {
    CapSpec::One
}

fn default_weight() -> WeightSpec {
    WeightSpec::Lebesgue
}

fn default_samples() -> usize {
    200_000
}

fn unit_ball_volume(d: u32) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI / 3.0,
    }
}

/// Uniform point in the centered d-ball: Gaussian direction, radial law
/// U^{1/d}.
fn ball_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Point {
    let mut g = num::ZERO3;
    let mut n2 = 0.0;
    while n2 < 1e-12 {
        for gi in g.iter_mut().take(d) {
            let u1: f64 = rng.random_range(1e-12..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            *gi = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
        n2 = num::dot(&g, &g);
    }
    let u: f64 = rng.random_range(0.0..1.0f64);
    let r = radius * u.powf(1.0 / d as f64);
    num::scale(&g, r / n2.sqrt())
}

/// Monte Carlo product-measure mass of the lifted body and its standard
/// error, over the box ball(dim, rk) x ball(beta, cap_max).
fn lifted_mass(p: &LiftParams, stream: u64, samples: usize) -> Result<(f64, f64)> {
    let grid = standard_grid(p.dim)?;
    let body = p.k.build(grid)?;
    let mu = p.weight.measure(p.dim)?;
    let rk = body.circumradius();
    let cap_max = (0..=64)
        .map(|i| p.cap.value_at_radius(rk * i as f64 / 64.0))
        .fold(0.0f64, f64::max);
    if cap_max <= 0.0 {
        return Err(Error::NotNonnegative(format!("cap maximum {cap_max} over the body")));
    }
    let d = p.beta as usize;
    let volume = unit_ball_volume(p.dim as u32) * rk.powi(p.dim as i32)
        * unit_ball_volume(p.beta) * cap_max.powi(p.beta as i32);

    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&p.seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&(samples as u64).to_le_bytes());
    key[24] = 0x6c;
    let mut rng = ChaCha8Rng::from_seed(key);

    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let x = ball_point(&mut rng, p.dim, rk);
        let y = ball_point(&mut rng, d, cap_max);
        let val = if body.contains(&x) && num::norm(&y) <= p.cap.value_at_radius(num::norm(&x)) {
            mu.density(&x)
        } else {
            0.0
        };
        sum += val;
        sumsq += val * val;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sumsq / n - mean * mean) / (n - 1.0)).max(0.0);
    Ok((volume * mean, volume * var.sqrt()))
}

/// Agreement margin 3 sigma - |nu_beta(K) - c_beta * lifted mass|; a
/// nonnegative margin means the two routes agree within noise.
pub struct Lift;

fn lift_margin(p: &LiftParams, stream: u64, samples: usize) -> Result<(f64, f64, f64)> {
    let grid = standard_grid(p.dim)?;
    let body = p.k.build(grid)?;
    let cap_fn = p.cap.build(p.dim)?;
    let mu = p.weight.measure(p.dim)?;
    let lhs = weighted_power_mass(&body, &cap_fn, 0.0, p.beta as f64, &mu, &QuadratureSpec::default())?;
    let (mass, sigma) = lifted_mass(p, stream, samples)?;
    let rhs = mass / unit_ball_volume(p.beta);
    let noise = 3.0 * (sigma / unit_ball_volume(p.beta) + lhs.error);
    Ok((noise - (lhs.value - rhs).abs(), lhs.value, rhs))
}

impl Check for Lift {
    fn name(&self) -> &'static str {
        "lift"
    }

    fn default_params(&self) -> Value {
        serde_json::json!({
            "dim": 1,
            "k": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "radial_quad", "c": 1.0, "b": 1.0 },
            "beta": 2,
        })
    }

    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value {
        let mut rng = instance_rng(self.name(), seed, index);
        let k = BodySpec::random(&mut rng, dim);
        let cap = CapSpec::random_positive(&mut rng, k.circumradius());
        serde_json::json!({
            "dim": dim,
            "k": k,
            "cap": cap,
            "beta": rng.random_range(1..4u32),
            "weight": WeightSpec::random(&mut rng),
            "seed": seed ^ index,
        })
    }

    fn run(&self, params: &Value) -> Result<CheckReport> {
        let p: LiftParams = parse_params(params)?;
        if p.dim == 0 || p.dim > 3 {
            return Err(Error::OutOfRange(format!("dimension {} not in 1..=3", p.dim)));
        }
        if !(1..=3).contains(&p.beta) {
            return Err(Error::UnsupportedBeta(format!(
                "fiber dimension {} must be 1, 2, or 3",
                p.beta
            )));
        }
        if p.samples < 1000 {
            return Err(Error::TooFewPoints(format!("{} samples, need at least 1000", p.samples)));
        }

        let (margin, lhs, rhs) = lift_margin(&p, 0, p.samples)?;
        let verdict = settle_verdict(margin, 0.0, || {
            let (m2, _, _) = lift_margin(&p, 1, 2 * p.samples)?;
            Ok((m2, 0.0))
        })?;

        Ok(CheckReport {
            name: self.name().to_string(),
            margin,
            tolerance: 0.0,
            verdict,
            theorem_status: TheoremStatus::Theorem,
            hypothesis_ok: true,
            lhs,
            rhs,
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
    fn flat_cylinder_agrees_exactly() {
        // K = [-1, 1], cap = 1, beta = 1: the lift is a 2 x 2 square and
        // both routes give 2.
        let params = serde_json::json!({
            "dim": 1,
            "k": { "shape": "ball", "radius": 1.0 },
            "beta": 1,
            "samples": 50_000,
        });
        let report = Lift.run(&params).unwrap();
        assert_abs_diff_eq!(report.lhs, 2.0, epsilon = 1e-10);
        assert!(report.margin >= 0.0, "margin {}", report.margin);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn parabola_cap_disc_fibers_match_the_polar_route() {
        // lhs = int (1 - x^2)^2 dx = 16/15.
        let params = serde_json::json!({
            "dim": 1,
            "k": { "shape": "ball", "radius": 1.0 },
            "cap": { "kind": "radial_quad", "c": 1.0, "b": 1.0 },
            "beta": 2,
            "samples": 400_000,
        });
        let report = Lift.run(&params).unwrap();
        assert_abs_diff_eq!(report.lhs, 16.0 / 15.0, epsilon = 1e-10);
        assert!(report.margin >= 0.0, "margin {}", report.margin);
        assert!((report.lhs - report.rhs).abs() < 0.01);
    }

    #[test]
    fn gaussian_weight_three_fibers_agree() {
        let params = serde_json::json!({
            "dim": 2,
            "k": { "shape": "ellipsoid", "semi_axes": [1.0, 0.8] },
            "cap": { "kind": "constant", "value": 1.3 },
            "beta": 3,
            "weight": { "family": "gaussian" },
            "samples": 200_000,
        });
        let report = Lift.run(&params).unwrap();
        assert!(report.margin >= 0.0, "margin {}", report.margin);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn high_fiber_dimension_is_unsupported() {
        let params = serde_json::json!({
            "dim": 1,
            "k": { "shape": "ball", "radius": 1.0 },
            "beta": 4,
        });
        let err = Lift.run(&params).unwrap_err();
        assert_eq!(err.code(), "UNSUPPORTED_BETA");
    }
}
