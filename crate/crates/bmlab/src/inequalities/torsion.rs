//! Weighted torsional rigidity on centered balls: radial Dirichlet solve,
//! the 1/(n+2)-power concavity check along Minkowski interpolation of
//! radii, and the joint midpoint concavity probe for the square root of
//! the torsion function.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::spec_types::{QuadOpts, WeightSpec};
use super::{
    instance_rng, parse_params, settle_verdict, Check, CheckReport, TheoremStatus,
};
use crate::measures::RadialWeight;
use crate::num::{self, Cumulative};
use crate::variation::{volume_integral, OneDimGeometry};
use crate::{Error, Result};

const SOLVE_CELLS: usize = 512;
const SOLVE_ORDER: usize = 16;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial Dirichlet solve of L_mu u = -1 on the centered ball, u = 0 on the
/// boundary, together with both torsion functionals.
pub(crate) struct RadialTorsion {
    pub u: RadialFn,
    pub u_coarse: RadialFn,
    pub tau: f64,
    pub energy: f64,
    pub error: f64,
}

fn solve_once(
    dim: usize,
    r0: f64,
    weight: &RadialWeight,
    cells: usize,
) -> (RadialFn, RadialFn, f64, f64) {
    let w = weight.clone();
    let nd = dim as i32 - 1;
    let j = move |r: f64| r.powi(nd) * (-w.w(r)).exp();
    let flux = Arc::new(Cumulative::new(j.clone(), 0.0, r0, cells, SOLVE_ORDER));
    let slope = {
        let flux = flux.clone();
        let j = j.clone();
        move |r: f64| flux.eval(r) / j(r)
    };
    let shape = Arc::new(Cumulative::new(slope, 0.0, r0, cells, SOLVE_ORDER));
    let total = shape.total();
    let u: RadialFn = Arc::new(move |r: f64| (total - shape.eval(r)).max(0.0));
    let du: RadialFn = Arc::new(move |r: f64| -flux.eval(r) / j(r));

    let geom = OneDimGeometry::from_dim(dim, r0);
    let wd = weight.clone();
    let dens = move |r: f64| (-wd.w(r)).exp();
    let uu = u.clone();
    let tau = volume_integral(&geom, &|c| uu(c.abs()) * dens(c.abs()));
    let dd = du.clone();
    let energy = volume_integral(&geom, &|c| dd(c.abs()).powi(2) * dens(c.abs()));
    (u, du, tau, energy)
}

pub(crate) fn solve_radial(
    dim: usize,
    r0: f64,
    weight: &RadialWeight,
    cells: usize,
) -> Result<RadialTorsion> {
    if !(1..=3).contains(&dim) {
        return Err(Error::OutOfRange(format!("dimension {dim} not in 1..=3")));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::NotPositive(format!("ball radius {r0}")));
    }
    let (u, _, tau, energy) = solve_once(dim, r0, weight, cells);
    let (u_coarse, _, tau_coarse, _) = solve_once(dim, r0, weight, (cells / 2).max(8));
    let error = (tau - tau_coarse).abs() + (tau - energy).abs() + 1e-15 * tau.abs();
    Ok(RadialTorsion { u, u_coarse, tau, energy, error })
}

/// Torsion solve record: both functional values, an error estimate from
/// resolution halving and the mass/energy gap, and a sampled profile.
#[derive(Clone, Serialize)]
pub struct TorsionSolve {
    pub dim: usize,
    pub r0: f64,
    /// int u dmu.
    pub tau: f64,
    /// int |grad u|^2 dmu; agrees with tau in exact arithmetic.
    pub energy: f64,
    pub error: f64,
    /// (radius, u) samples across the ball.
    pub profile: Vec<[f64; 2]>,
    #[serde(skip)]
    u: RadialFn,
}

impl TorsionSolve {
    pub fn value(&self, r: f64) -> f64 {
        (self.u)(r)
    }
}

pub fn torsion_solve(dim: usize, r0: f64, weight: &RadialWeight) -> Result<TorsionSolve> {
    let s = solve_radial(dim, r0, weight, SOLVE_CELLS)?;
    let profile = (0..=32)
        .map(|i| {
            let r = r0 * i as f64 / 32.0;
            [r, (s.u)(r)]
        })
        .collect();
    Ok(TorsionSolve {
        dim,
        r0,
        tau: s.tau,
        energy: s.energy,
        error: s.error,
        profile,
        u: s.u,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TorsionBmParams {
    dim: usize,
    #[serde(default = "default_weight")]
    weight: WeightSpec,
    radius_k: f64,
    radius_l: f64,
    lambda: f64,
    #[serde(default)]
    quad: QuadOpts,
}

fn default_weight() -> WeightSpec {
    WeightSpec::Lebesgue
}

/// tau(lambda K + (1 - lambda) L)^{1/(n+2)} against the lambda-mix of the
/// endpoint values, for centered balls.
pub struct TorsionBm;

fn torsion_bm_margin(p: &TorsionBmParams, cells: usize) -> Result<(f64, f64, f64)> {
    let w = p.weight.build()?;
    let rc = p.lambda * p.radius_k + (1.0 - p.lambda) * p.radius_l;
    let sk = solve_radial(p.dim, p.radius_k, &w, cells)?;
    let sl = solve_radial(p.dim, p.radius_l, &w, cells)?;
    let sc = solve_radial(p.dim, rc, &w, cells)?;
    let gamma = 1.0 / (p.dim as f64 + 2.0);
    let margin = sc.tau.powf(gamma)
        - p.lambda * sk.tau.powf(gamma)
        - (1.0 - p.lambda) * sl.tau.powf(gamma);
    let deriv = |s: &RadialTorsion| gamma * s.tau.powf(gamma - 1.0) * s.error;
    let err = deriv(&sc) + p.lambda * deriv(&sk) + (1.0 - p.lambda) * deriv(&sl);
    Ok((margin, err, sc.tau.powf(gamma)))
}

impl Check for TorsionBm {
    fn name(&self) -> &'static str {
        "torsion_bm"
    }

    fn default_params(&self) -> Value {
        serde_json::json!({
            "dim": 2,
            "radius_k": 1.0,
            "radius_l": 0.5,
            "lambda": 0.5,
        })
    }

    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value {
        let mut rng = instance_rng(self.name(), seed, index);
        let weight =
            if index % 2 == 0 { WeightSpec::Lebesgue } else { WeightSpec::random(&mut rng) };
        serde_json::json!({
            "dim": dim,
            "weight": weight,
            "radius_k": rng.random_range(0.5..1.6),
            "radius_l": rng.random_range(0.5..1.6),
            "lambda": rng.random_range(0.1..0.9),
        })
    }

    fn run(&self, params: &Value) -> Result<CheckReport> {
        let p: TorsionBmParams = parse_params(params)?;
        if !(0.0..=1.0).contains(&p.lambda) {
            return Err(Error::OutOfRange(format!("lambda {} not in [0, 1]", p.lambda)));
        }
        let (margin, err, lhs) = torsion_bm_margin(&p, SOLVE_CELLS)?;
        let tolerance = 10.0 * err + 1e-13;
        let verdict = settle_verdict(margin, tolerance, || {
            let (m2, e2, _) = torsion_bm_margin(&p, 2 * SOLVE_CELLS)?;
            Ok((m2, 10.0 * e2 + 1e-13))
        })?;

        Ok(CheckReport {
            name: self.name().to_string(),
            margin,
            tolerance,
            verdict,
            theorem_status: if p.weight.is_lebesgue() {
                TheoremStatus::Theorem
            } else {
                TheoremStatus::Exploratory
            },
            hypothesis_ok: true,
            lhs,
            rhs: lhs - margin,
            witness: serde_json::to_value(&p).expect("params serialize"),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TorsionSqrtParams {
    dim: usize,
    #[serde(default = "default_weight")]
    weight: WeightSpec,
    /// Ball radius at lambda = 1.
    radius_k: f64,
    /// Ball radius at lambda = 0.
    radius_l: f64,
    #[serde(default = "default_lambda_count")]
    lambda_count: usize,
    #[serde(default = "default_pairs")]
    pairs: usize,
}

fn default_lambda_count() -> usize {
    9
}

fn default_pairs() -> usize {
    16
}

/// Midpoint probe of joint concavity of sqrt(u) in (lambda, x) along a
/// family of balls with linearly interpolated radii. Open territory: the
/// status stays exploratory even over the flat weight.
pub struct TorsionSqrt;

fn sqrt_probe(p: &TorsionSqrtParams, cells: usize) -> Result<(f64, f64)> {
    let w = p.weight.build()?;
    let count = p.lambda_count;
    let radius =
        |i: usize| -> f64 {
            let lam = i as f64 / (count - 1) as f64;
            lam * p.radius_k + (1.0 - lam) * p.radius_l
        };
    let solves: Vec<RadialTorsion> = (0..count)
        .map(|i| solve_radial(p.dim, radius(i), &w, cells))
        .collect::<Result<_>>()?;

    let mut margin = f64::INFINITY;
    let mut tol = 0.0f64;
    for i in 0..count {
        for jj in i..count {
            if (i + jj) % 2 != 0 {
                continue;
            }
            let mid = (i + jj) / 2;
            for k in 1..=p.pairs {
                let h = num::halton(k, 2);
                let s1 = (2.0 * h[0] - 1.0) * 0.999 * radius(i);
                let s2 = (2.0 * h[1] - 1.0) * 0.999 * radius(jj);
                let sm = 0.5 * (s1 + s2);
                let u1 = (solves[i].u)(s1.abs());
                let u2 = (solves[jj].u)(s2.abs());
                let um = (solves[mid].u)(sm.abs());
                let gap = um.sqrt() - 0.5 * (u1.sqrt() + u2.sqrt());
                if gap < margin {
                    margin = gap;
                }
                let delta = |s: &RadialTorsion, r: f64, u: f64| {
                    let d = ((s.u)(r) - (s.u_coarse)(r)).abs() + 1e-15;
                    d / (2.0 * u.sqrt().max(1e-9))
                };
                let t = delta(&solves[mid], sm.abs(), um)
                    + 0.5 * delta(&solves[i], s1.abs(), u1)
                    + 0.5 * delta(&solves[jj], s2.abs(), u2);
                tol = tol.max(t);
            }
        }
    }
    Ok((margin, tol))
}

impl Check for TorsionSqrt {
    fn name(&self) -> &'static str {
        "torsion_sqrt"
    }

    fn default_params(&self) -> Value {
        serde_json::json!({
            "dim": 1,
            "radius_k": 1.0,
            "radius_l": 0.6,
            "lambda_count": 5,
            "pairs": 8,
        })
    }

    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value {
        let mut rng = instance_rng(self.name(), seed, index);
        serde_json::json!({
            "dim": dim,
            "weight": WeightSpec::random(&mut rng),
            "radius_k": rng.random_range(0.6..1.5),
            "radius_l": rng.random_range(0.6..1.5),
            "lambda_count": 5,
            "pairs": 8,
        })
    }

    fn run(&self, params: &Value) -> Result<CheckReport> {
        let p: TorsionSqrtParams = parse_params(params)?;
        if p.lambda_count < 3 {
            return Err(Error::TooFewPoints(format!(
                "lambda grid needs at least 3 points, got {}",
                p.lambda_count
            )));
        }
        if p.pairs == 0 || p.pairs > 512 {
            return Err(Error::OutOfRange(format!("pairs {} not in 1..=512", p.pairs)));
        }
        let (margin, tol) = sqrt_probe(&p, SOLVE_CELLS)?;
        let tolerance = 10.0 * tol;
        let verdict = settle_verdict(margin, tolerance, || {
            let (m2, t2) = sqrt_probe(&p, 2 * SOLVE_CELLS)?;
            Ok((m2, 10.0 * t2))
        })?;

        Ok(CheckReport {
            name: self.name().to_string(),
            margin,
            tolerance,
            verdict,
            theorem_status: TheoremStatus::Exploratory,
            hypothesis_ok: true,
            lhs: margin,
            rhs: 0.0,
            witness: serde_json::to_value(&p).expect("params serialize"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::Verdict;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_interval_torsion_is_two_thirds_a_cubed() {
        for a in [1.0, 1.3] {
            let s = torsion_solve(1, a, &RadialWeight::Lebesgue).unwrap();
            assert_abs_diff_eq!(s.tau, 2.0 * a.powi(3) / 3.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s.energy, s.tau, epsilon = 1e-9);
            // u(x) = (a^2 - x^2) / 2.
            assert_abs_diff_eq!(s.value(0.0), a * a / 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(s.value(a), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn flat_disc_torsion_is_pi_r4_over_8() {
        let r = 1.2;
        let s = torsion_solve(2, r, &RadialWeight::Lebesgue).unwrap();
        assert_abs_diff_eq!(s.tau, std::f64::consts::PI * r.powi(4) / 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.value(0.5), (r * r - 0.25) / 4.0, epsilon = 1e-10);
    }

    #[test]
    fn flat_ball_torsion_is_4_pi_r5_over_45() {
        let s = torsion_solve(3, 1.0, &RadialWeight::Lebesgue).unwrap();
        assert_abs_diff_eq!(s.tau, 4.0 * std::f64::consts::PI / 45.0, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_torsion_mass_and_energy_agree() {
        for dim in 1..=3usize {
            let s = torsion_solve(dim, 1.4, &RadialWeight::Gaussian).unwrap();
            assert_abs_diff_eq!(s.tau, s.energy, epsilon = 1e-9);
            assert!(s.tau > 0.0);
        }
    }

    #[test]
    fn flat_homothets_are_exactly_on_the_power_line() {
        let params = serde_json::json!({
            "dim": 2,
            "radius_k": 1.5,
            "radius_l": 0.75,
            "lambda": 0.4,
        });
        let report = TorsionBm.run(&params).unwrap();
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-9);
        assert_eq!(report.verdict, Verdict::Holds);
        assert_eq!(report.theorem_status, TheoremStatus::Theorem);
    }

    #[test]
    fn equal_radii_are_flat_for_any_weight() {
        let params = serde_json::json!({
            "dim": 1,
            "weight": { "family": "power", "alpha": 2.0 },
            "radius_k": 1.0,
            "radius_l": 1.0,
            "lambda": 0.3,
        });
        let report = TorsionBm.run(&params).unwrap();
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-12);
        assert_eq!(report.theorem_status, TheoremStatus::Exploratory);
    }

    #[test]
    fn sqrt_profile_is_midpoint_concave_for_flat_balls() {
        let report = TorsionSqrt.run(&TorsionSqrt.default_params()).unwrap();
        assert!(
            report.margin >= -report.tolerance,
            "margin {} tolerance {}",
            report.margin,
            report.tolerance
        );
        assert_eq!(report.verdict, Verdict::Holds);
        assert_eq!(report.theorem_status, TheoremStatus::Exploratory);
    }

    #[test]
    fn sqrt_of_flat_interval_solution_is_exactly_concave() {
        // u = (a^2 - x^2) / 2, so sqrt(u) traces a scaled half-circle in
        // (lambda, x); the sampled midpoint gaps must be nonnegative.
        let params = serde_json::json!({
            "dim": 1,
            "radius_k": 1.0,
            "radius_l": 1.0,
            "lambda_count": 3,
            "pairs": 32,
        });
        let report = TorsionSqrt.run(&params).unwrap();
        assert!(report.margin >= -1e-10, "margin {}", report.margin);
    }
}
