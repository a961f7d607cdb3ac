//! Variance-domination checks: the diagonal-moment inequality for even
//! log-concave perturbations of the Gaussian, and the Hessian-weighted
//! variance bound for strictly log-concave densities.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::spec_types::{density_moment, EvenConvexPotential, PolyTestFn, QuadOpts, WeightSpec};
use super::{
    instance_rng, parse_params, ratio_err, settle_verdict, Check, CheckReport, TheoremStatus,
};
use crate::integrate::QuadratureSpec;
use crate::{Error, Point, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BLocalParams {
    dim: usize,
    /// Even convex perturbation V; the density is e^{-V} against the
    /// standard Gaussian.
    v: EvenConvexPotential,
    /// Diagonal of D, any signs.
    diagonal: Vec<f64>,
    #[serde(default)]
    quad: QuadOpts,
}

/// Var(<x, Dx>) <= 2 int <x, D^2 x> for even log-concave perturbations of
/// the Gaussian and diagonal D.
pub struct BLocal;

fn b_local_sides(p: &BLocalParams, spec: &QuadratureSpec) -> Result<(f64, f64, f64)> {
    let mu = WeightSpec::Gaussian.measure(p.dim)?;
    let v = p.v.clone();
    let dens = move |x: &Point| (-v.value(x)).exp();
    let d = p.diagonal.clone();
    let q = move |x: &Point| -> f64 { d.iter().zip(x.iter()).map(|(d, x)| d * x * x).sum() };
    let d2 = p.diagonal.clone();
    let q2 = move |x: &Point| -> f64 {
        d2.iter().zip(x.iter()).map(|(d, x)| d * d * x * x).sum()
    };

    let z = density_moment(|_| 1.0, &dens, &mu, spec)?;
    let m1 = density_moment(&q, &dens, &mu, spec)?;
    let m2 = density_moment(|x| q(x).powi(2), &dens, &mu, spec)?;
    let a = density_moment(&q2, &dens, &mu, spec)?;

    let mean = m1.value / z.value;
    let lhs = m2.value / z.value - mean * mean;
    let rhs = 2.0 * a.value / z.value;
    let err = ratio_err(m2.value, m2.error, z.value, z.error)
        + 2.0 * mean.abs() * ratio_err(m1.value, m1.error, z.value, z.error)
        + 2.0 * ratio_err(a.value, a.error, z.value, z.error);
    Ok((lhs, rhs, err))
}

impl Check for BLocal {
    fn name(&self) -> &'static str {
        "b_local"
    }

    fn default_params(&self) -> Value {
        serde_json::json!({
            "dim": 1,
            "v": { "powers": [{ "coef": 1.0, "dir": [1.0], "exponent": 4.0 }] },
            "diagonal": [1.0],
        })
    }

    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value {
        let mut rng = instance_rng(self.name(), seed, index);
        let v = EvenConvexPotential::random(&mut rng, dim, 1.0);
        let diagonal: Vec<f64> =
            (0..dim).map(|_| rand::Rng::random_range(&mut rng, -1.5..1.5)).collect();
        serde_json::json!({ "dim": dim, "v": v, "diagonal": diagonal })
    }

    fn run(&self, params: &Value) -> Result<CheckReport> {
        let p: BLocalParams = parse_params(params)?;
        if p.dim == 0 || p.dim > 3 {
            return Err(Error::OutOfRange(format!("dimension {} not in 1..=3", p.dim)));
        }
        if p.diagonal.len() != p.dim {
            return Err(Error::GridMismatch(format!(
                "diagonal has {} entries in dimension {}",
                p.diagonal.len(),
                p.dim
            )));
        }
        p.v.validate(p.dim, 1.0)?;

        let (lhs, rhs, err) = b_local_sides(&p, &p.quad.spec())?;
        let margin = rhs - lhs;
        let tolerance = 10.0 * err;
        let verdict = settle_verdict(margin, tolerance, || {
            let (l2, r2, e2) = b_local_sides(&p, &p.quad.cross_spec())?;
            Ok((r2 - l2, 10.0 * e2))
        })?;

        Ok(CheckReport {
            name: self.name().to_string(),
            margin,
            tolerance,
            verdict,
            theorem_status: TheoremStatus::Theorem,
            hypothesis_ok: true,
            lhs,
            rhs,
            witness: serde_json::to_value(&p).expect("params serialize"),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BrascampLiebParams {
    dim: usize,
    /// Symmetric positive definite matrix Q; the log-density carries the
    /// quadratic term <x, Qx> / 2.
    quadratic: Vec<Vec<f64>>,
    /// Additional even convex terms added to the potential.
    #[serde(default)]
    extra: EvenConvexPotential,
    f: PolyTestFn,
    #[serde(default)]
    quad: QuadOpts,
}

/// Var(f) <= int <(Hess G)^{-1} grad f, grad f> for densities e^{-G} with
/// Hess G strictly positive.
pub struct BrascampLieb;

fn read_matrix(rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::GridMismatch(format!("quadratic matrix is not {dim} x {dim}")));
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    Ok((&m + m.transpose()) * 0.5)
}

fn brascamp_lieb_sides(
    p: &BrascampLiebParams,
    q: &DMatrix<f64>,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    let mu = WeightSpec::Lebesgue.measure(p.dim)?;
    let dim = p.dim;
    let extra = p.extra.clone();
    let qm = q.clone();
    let dens = move |x: &Point| {
        let mut quad = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                quad += x[i] * qm[(i, j)] * x[j];
            }
        }
        (-0.5 * quad - extra.value(x)).exp()
    };
    let f = p.f.clone();
    let fval = move |x: &Point| f.value(x);
    let f2 = p.f.clone();
    let extra2 = p.extra.clone();
    let qh = q.clone();
    let energy = move |x: &Point| -> f64 {
        let g = f2.grad(x);
        let hess = &qh + extra2.hess(x, dim);
        let rhs = nalgebra::DVector::from_fn(dim, |i, _| g[i]);
        match hess.lu().solve(&rhs) {
            Some(y) => (0..dim).map(|i| y[i] * g[i]).sum(),
            None => f64::NAN,
        }
    };

    let z = density_moment(|_| 1.0, &dens, &mu, spec)?;
    let m1 = density_moment(&fval, &dens, &mu, spec)?;
    let m2 = density_moment(|x| fval(x).powi(2), &dens, &mu, spec)?;
    let b = density_moment(&energy, &dens, &mu, spec)?;

    let mean = m1.value / z.value;
    let lhs = m2.value / z.value - mean * mean;
    let rhs = b.value / z.value;
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::NonFiniteIntegrand("variance comparison".into()));
    }
    let err = ratio_err(m2.value, m2.error, z.value, z.error)
        + 2.0 * mean.abs() * ratio_err(m1.value, m1.error, z.value, z.error)
        + ratio_err(b.value, b.error, z.value, z.error);
    Ok((lhs, rhs, err))
}

impl Check for BrascampLieb {
    fn name(&self) -> &'static str {
        "brascamp_lieb"
    }

    fn default_params(&self) -> Value {
        serde_json::json!({
            "dim": 1,
            "quadratic": [[1.0]],
            "f": { "squares": [{ "coef": 1.0, "dir": [1.0] }] },
        })
    }

    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value {
        let mut rng = instance_rng(self.name(), seed, index);
        let c = rand::Rng::random_range(&mut rng, 0.4..1.6);
        let u = super::spec_types::random_unit(&mut rng, dim);
        let mut quadratic = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            quadratic[i][i] = c;
            for j in 0..dim {
                quadratic[i][j] += u[i] * u[j];
            }
        }
        let extra = EvenConvexPotential::random(&mut rng, dim, 2.0);
        let f = if index % 3 == 0 {
            // Linear test functions saturate the bound for pure Gaussians.
            let mut f = PolyTestFn::default();
            f.linear = super::spec_types::random_unit(&mut rng, dim);
            f
        } else {
            PolyTestFn::random_any(&mut rng, dim)
        };
        serde_json::json!({ "dim": dim, "quadratic": quadratic, "extra": extra, "f": f })
    }

    fn run(&self, params: &Value) -> Result<CheckReport> {
        let p: BrascampLiebParams = parse_params(params)?;
        if p.dim == 0 || p.dim > 3 {
            return Err(Error::OutOfRange(format!("dimension {} not in 1..=3", p.dim)));
        }
        p.extra.validate(p.dim, 2.0)?;
        p.f.validate(p.dim)?;
        let q = read_matrix(&p.quadratic, p.dim)?;
        let min_eig = q.symmetric_eigenvalues().min();
        if min_eig <= 1e-10 {
            return Err(Error::NotStrictlyLogConcave(format!(
                "quadratic part has minimal eigenvalue {min_eig:.3e}"
            )));
        }

        let (lhs, rhs, err) = brascamp_lieb_sides(&p, &q, &p.quad.spec())?;
        let margin = rhs - lhs;
        let tolerance = 10.0 * err;
        let verdict = settle_verdict(margin, tolerance, || {
            let (l2, r2, e2) = brascamp_lieb_sides(&p, &q, &p.quad.cross_spec())?;
            Ok((r2 - l2, 10.0 * e2))
        })?;

        Ok(CheckReport {
            name: self.name().to_string(),
            margin,
            tolerance,
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
    fn b_local_saturates_for_pure_gaussian_identity() {
        // V = 0, D = I: both sides equal 2n.
        for dim in 1..=3usize {
            let params = serde_json::json!({
                "dim": dim,
                "v": {},
                "diagonal": vec![1.0; dim],
            });
            let report = BLocal.run(&params).unwrap();
            assert_abs_diff_eq!(report.lhs, 2.0 * dim as f64, epsilon = 1e-8);
            assert_abs_diff_eq!(report.rhs, 2.0 * dim as f64, epsilon = 1e-8);
            assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-8);
            assert_eq!(report.verdict, Verdict::Holds);
        }
    }

    #[test]
    fn b_local_quartic_perturbation_has_slack() {
        let report = BLocal.run(&BLocal.default_params()).unwrap();
        assert!(report.margin > 0.1, "margin {}", report.margin);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn b_local_mixed_signs_hold() {
        let params = serde_json::json!({
            "dim": 2,
            "v": { "squares": [{ "coef": 0.5, "dir": [1.0, 0.0] }] },
            "diagonal": [1.0, -2.0],
        });
        let report = BLocal.run(&params).unwrap();
        assert!(report.margin >= -report.tolerance);
    }

    #[test]
    fn brascamp_lieb_linear_saturates_for_gaussian() {
        let params = serde_json::json!({
            "dim": 1,
            "quadratic": [[1.0]],
            "f": { "linear": [1.0] },
        });
        let report = BrascampLieb.run(&params).unwrap();
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-8);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn brascamp_lieb_square_gap_is_two() {
        // f = x^2 under the standard Gaussian: Var = 2, energy = 4.
        let report = BrascampLieb.run(&BrascampLieb.default_params()).unwrap();
        assert_abs_diff_eq!(report.lhs, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.rhs, 4.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.margin, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn brascamp_lieb_quartic_cubic_holds() {
        let params = serde_json::json!({
            "dim": 1,
            "quadratic": [[2.0]],
            "extra": { "powers": [{ "coef": 1.0, "dir": [1.0], "exponent": 4.0 }] },
            "f": { "cubes": [{ "coef": 1.0, "dir": [1.0] }] },
        });
        let report = BrascampLieb.run(&params).unwrap();
        assert!(report.margin > 0.0);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn brascamp_lieb_rejects_degenerate_quadratic() {
        let params = serde_json::json!({
            "dim": 2,
            "quadratic": [[1.0, 0.0], [0.0, 0.0]],
            "f": { "linear": [1.0, 0.0] },
        });
        let err = BrascampLieb.run(&params).unwrap_err();
        assert_eq!(err.code(), "NOT_STRICTLY_LOGCONCAVE");
    }
}
