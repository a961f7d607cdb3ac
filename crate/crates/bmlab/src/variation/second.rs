//! Term-by-term assembly of the second-derivative formula for marginal
//! profiles on interval and radial-ball sections.
//!
//! With nu the normalized measure Phi(t0,.)^beta dmu on the section, u the
//! Neumann solution, A = int L_mu u dnu, B = int (dtPhi/Phi) dnu and
//! C = int_Sigma psi dnu, the assembled value is (1/gamma) phi''(t0)/phi(t0).
//! Radial data has no tangential variation, so the boundary form terms vanish
//! identically here and are reported as exact zeros.
//!
//! The surface integral of (dtPhi/Phi) psi enters the identity twice with
//! opposite signs, once from the bulk derivative and once from the explicit
//! time dependence of the surface density, so its net coefficient is zero.
//! It is still evaluated and exposed as `surface_transport` for diagnostics.
//! Cross-checked against high-precision direct differentiation of phi on
//! closed-form instances (interval and radial, several beta and weights).

use std::sync::Arc;

use serde::Serialize;

use crate::marginals::MarginalProblem;
use crate::num;
use crate::variation::kinematics::BoundaryKinematics;
use crate::variation::neumann::{solve_neumann, NeumannData, NeumannSolution};
use crate::variation::{lmu_on_line, surface_integral, volume_integral, OneDimGeometry};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VariationTerms {
    /// beta int <Hess Phi X, X>/Phi dnu with X = (1, -beta grad u).
    pub joint_hessian: f64,
    /// -beta^2 int (|Hess u|^2 + <Hess W grad u, grad u>) dnu.
    pub bochner_bulk: f64,
    /// -beta int (L_mu u)^2 dnu.
    pub lmu_square: f64,
    /// -beta (1 - beta gamma) B^2.
    pub b_square: f64,
    /// -(1/beta - gamma) C^2.
    pub c_square: f64,
    /// -2 beta A B.
    pub ab_cross: f64,
    /// -2 A C.
    pub ac_cross: f64,
    /// -2 beta (1/beta - gamma) B C.
    pub bc_cross: f64,
    /// + int_Sigma d/dt psi_t dnu.
    pub boundary_accel: f64,
    /// Tangential boundary form terms; identically zero for radial data.
    pub boundary_ii: f64,
}

impl VariationTerms {
    pub fn total(&self) -> f64 {
        self.joint_hessian
            + self.bochner_bulk
            + self.lmu_square
            + self.b_square
            + self.c_square
            + self.ab_cross
            + self.ac_cross
            + self.bc_cross
            + self.boundary_accel
            + self.boundary_ii
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SecondVariation {
    pub t0: f64,
    pub beta: f64,
    pub gamma: f64,
    /// (1/gamma) phi''(t0) / phi(t0).
    pub value: f64,
    pub phi_t0: f64,
    /// Implied phi''(t0) = gamma phi(t0) value.
    pub phi_dd: f64,
    pub terms: VariationTerms,
    pub a_mean: f64,
    pub b_mean: f64,
    pub c_mean: f64,
    /// int_Sigma (dtPhi/Phi) psi dnu; net coefficient zero in the identity.
    pub surface_transport: f64,
    pub solver_defect: f64,
    pub solver_residual: f64,
}

fn coord_point(c: f64) -> Point {
    [c, 0.0, 0.0]
}

/// nu-potential G with e^{-G} = Phi(t0,.)^beta e^{-W} on the line coordinate,
/// together with its derivative. Owned closures, usable by the ODE solver.
fn nu_potential(
    p: &MarginalProblem,
    t0: f64,
) -> (
    Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    Arc<dyn Fn(f64) -> f64 + Send + Sync>,
) {
    let beta = p.beta;
    let cap = p.cap.clone();
    let weight = p.mu.weight.clone();
    let cap2 = cap.clone();
    let weight2 = weight.clone();
    let g = move |c: f64| weight.w(c.abs()) - beta * cap.value(t0, &coord_point(c)).ln();
    let dg = move |c: f64| {
        let s = if c >= 0.0 { 1.0 } else { -1.0 };
        let pt = coord_point(c);
        weight2.dw(c.abs()) * s - beta * cap2.grad_x(t0, &pt)[0] / cap2.value(t0, &pt)
    };
    (Arc::new(g), Arc::new(dg))
}

fn check_radial_instance(p: &MarginalProblem, t0: f64, r0: f64) -> Result<()> {
    let n = p.dim();
    if n < 2 {
        return Ok(());
    }
    let r = 0.5 * r0;
    let dirs: [Point; 3] = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0],
    ];
    let base = p.cap.value(t0, &num::scale(&dirs[0], r));
    for d in &dirs[1..] {
        let v = p.cap.value(t0, &num::scale(d, r));
        if (v - base).abs() > 1e-9 * (1.0 + base.abs()) {
            return Err(Error::IncompatibleData(
                "cap is not radial on the section; the reduction needs radial data".into(),
            ));
        }
    }
    Ok(())
}

fn check_positive(p: &MarginalProblem, t0: f64, geom: &OneDimGeometry) -> Result<f64> {
    let (lo, hi) = geom.coord_range();
    let mut min = f64::INFINITY;
    for i in 0..=512 {
        let c = lo + (hi - lo) * i as f64 / 512.0;
        min = min.min(p.cap.value(t0, &coord_point(c)));
    }
    if min <= 0.0 {
        return Err(Error::NotPositive(format!(
            "cap reaches {min:.3e} on the closed section"
        )));
    }
    Ok(min)
}

/// Solve the Neumann problem attached to the marginal instance at t0 and
/// assemble the full formula. Convenience wrapper over `second_variation_rhs`.
pub fn second_variation(p: &MarginalProblem, t0: f64) -> Result<SecondVariation> {
    let kin = BoundaryKinematics::from_family(&p.family, t0)?;
    let geom = OneDimGeometry::from_dim(p.dim(), kin.r0);
    check_positive(p, t0, &geom)?;
    check_radial_instance(p, t0, kin.r0)?;
    let (g, dg) = nu_potential(p, t0);

    // Normalized means entering the right-hand side of the equation.
    let dens = {
        let g = g.clone();
        move |c: f64| (-(g.as_ref())(c)).exp()
    };
    let mass = volume_integral(&geom, &dens);
    let cap = p.cap.clone();
    let q = move |c: f64| {
        let pt = coord_point(c);
        cap.dt(t0, &pt) / cap.value(t0, &pt)
    };
    let b_mean = volume_integral(&geom, &|c| q(c) * dens(c)) / mass;
    let c_mean = surface_integral(&geom, &|c| kin.psi * dens(c)) / mass;

    let beta = p.beta;
    let rhs = {
        let q2 = {
            let cap = p.cap.clone();
            move |c: f64| {
                let pt = coord_point(c);
                cap.dt(t0, &pt) / cap.value(t0, &pt)
            }
        };
        move |c: f64| q2(c) - b_mean - c_mean / beta
    };
    let data = NeumannData::uniform(&geom, -kin.psi / beta);
    let g_solver = {
        let g = g.clone();
        move |c: f64| (g.as_ref())(c)
    };
    let dg_solver = {
        let dg = dg.clone();
        move |c: f64| (dg.as_ref())(c)
    };
    let sol = solve_neumann(geom, g_solver, dg_solver, rhs, data)?;
    second_variation_rhs(p, t0, &kin, &sol)
}

/// Assemble (1/gamma) phi''(t0)/phi(t0) from a Neumann solution that solves
/// the equation with data -psi/beta on the section at t0.
pub fn second_variation_rhs(
    p: &MarginalProblem,
    t0: f64,
    kin: &BoundaryKinematics,
    sol: &NeumannSolution,
) -> Result<SecondVariation> {
    let n = p.dim();
    let beta = p.beta;
    let gamma = p.gamma();
    if kin.dim != n {
        return Err(Error::MissingKinematics(format!(
            "kinematics dimension {} vs problem dimension {n}",
            kin.dim
        )));
    }
    if sol.geometry.dim() != n || (sol.geometry.r0() - kin.r0).abs() > 1e-9 * kin.r0 {
        return Err(Error::MissingKinematics(
            "solution geometry does not match the kinematics".into(),
        ));
    }
    let Some(section) = p.family.section(t0)? else {
        return Err(Error::MissingKinematics(format!("empty section at t = {t0}")));
    };
    let sec_r = section.radial(&[1.0, 0.0, 0.0]);
    if (sec_r - kin.r0).abs() > 1e-6 * kin.r0 {
        return Err(Error::MissingKinematics(format!(
            "section radius {sec_r} vs kinematics radius {}",
            kin.r0
        )));
    }
    let geom = sol.geometry;
    check_positive(p, t0, &geom)?;
    check_radial_instance(p, t0, kin.r0)?;

    // The solution must carry the Neumann data -psi/beta.
    let want = -kin.psi / beta;
    let achieved_ok = match sol.achieved {
        NeumannData::Interval { left, right } => {
            (left - want).abs() <= 1e-6 * (1.0 + want.abs())
                && (right - want).abs() <= 1e-6 * (1.0 + want.abs())
        }
        NeumannData::Radial { outer } => (outer - want).abs() <= 1e-6 * (1.0 + want.abs()),
    };
    if !achieved_ok {
        return Err(Error::IncompatibleData(format!(
            "solution Neumann data does not match -psi/beta = {want}"
        )));
    }

    let (g, _) = nu_potential(p, t0);
    let dens = move |c: f64| (-(g.as_ref())(c)).exp();
    let mass = volume_integral(&geom, &dens);
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::NotPositive(format!("section nu-mass {mass}")));
    }

    let cap = &p.cap;
    let q = |c: f64| {
        let pt = coord_point(c);
        cap.dt(t0, &pt) / cap.value(t0, &pt)
    };

    let a_mean = volume_integral(&geom, &|c| {
        lmu_on_line(&p.mu, &geom, c, sol.du_at(c), sol.ddu_at(c)) * dens(c)
    }) / mass;
    let b_mean = volume_integral(&geom, &|c| q(c) * dens(c)) / mass;
    let c_mean = surface_integral(&geom, &|c| kin.psi * dens(c)) / mass;

    let nf = n as f64;
    let joint_hessian = beta
        * volume_integral(&geom, &|c| {
            let pt = coord_point(c);
            let h = cap.hess_joint(t0, &pt);
            let du = sol.du_at(c);
            let x_on_x = h[0][0] - 2.0 * beta * du * h[0][1] + beta * beta * du * du * h[1][1];
            x_on_x / cap.value(t0, &pt) * dens(c)
        })
        / mass;
    let bochner_bulk = -beta
        * beta
        * volume_integral(&geom, &|c| {
            let du = sol.du_at(c);
            let ddu = sol.ddu_at(c);
            let trans = if n >= 2 { (nf - 1.0) * (du / c) * (du / c) } else { 0.0 };
            let hess2 = ddu * ddu + trans;
            let wquad = p.mu.weight.ddw(c.abs()) * du * du;
            (hess2 + wquad) * dens(c)
        })
        / mass;
    let lmu_square = -beta
        * volume_integral(&geom, &|c| {
            let v = lmu_on_line(&p.mu, &geom, c, sol.du_at(c), sol.ddu_at(c));
            v * v * dens(c)
        })
        / mass;

    let b_square = -beta * (1.0 - beta * gamma) * b_mean * b_mean;
    let c_square = -(1.0 / beta - gamma) * c_mean * c_mean;
    let ab_cross = -2.0 * beta * a_mean * b_mean;
    let ac_cross = -2.0 * a_mean * c_mean;
    let bc_cross = -2.0 * beta * (1.0 / beta - gamma) * b_mean * c_mean;

    let surface_transport = surface_integral(&geom, &|c| q(c) * kin.psi * dens(c)) / mass;
    let boundary_accel = surface_integral(&geom, &|c| kin.psi_dot * dens(c)) / mass;

    let terms = VariationTerms {
        joint_hessian,
        bochner_bulk,
        lmu_square,
        b_square,
        c_square,
        ab_cross,
        ac_cross,
        bc_cross,
        boundary_accel,
        boundary_ii: 0.0,
    };
    let value = terms.total();
    let phi_t0 = mass.powf(gamma);
    Ok(SecondVariation {
        t0,
        beta,
        gamma,
        value,
        phi_t0,
        phi_dd: gamma * phi_t0 * value,
        terms,
        a_mean,
        b_mean,
        c_mean,
        surface_transport,
        solver_defect: sol.compat_defect,
        solver_residual: sol.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConcaveFn, ConvexDomainFamily, DirectionGrid, RadiusFn};
    use crate::integrate::QuadratureSpec;
    use crate::measures::{RadialWeight, WeightedMeasure};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc as StdArc;

    fn disc_problem() -> MarginalProblem {
        let grid = StdArc::new(DirectionGrid::standard(1).unwrap());
        let family = ConvexDomainFamily::super_level(
            grid,
            ConcaveFn::radial_quad_cap(1.0, 1.0, 0.0, 1.0, 1).unwrap(),
            0.0,
            (-1.0, 1.0),
        )
        .unwrap();
        let cap = ConcaveFn::radial_quad_cap(2.0, 1.0, 0.0, 1.0, 1).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Lebesgue, 1).unwrap();
        MarginalProblem::new(family, cap, 1.0, mu).unwrap()
    }

    #[test]
    fn disc_oracle_at_the_center() {
        // Closed form: F(t) = int Phi^1 over the section = 10/3 at t = 0,
        // F''(0) = -6, phi = sqrt(F), phi''(0) = -(9/10) sqrt(10/3), and
        // (1/gamma) phi''/phi = -9/5 split as bulk -6/5 plus psi_dot -3/5.
        let p = disc_problem();
        let sv = second_variation(&p, 0.0).unwrap();
        assert_abs_diff_eq!(sv.value, -9.0 / 5.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sv.terms.joint_hessian, -6.0 / 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sv.terms.boundary_accel, -3.0 / 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sv.phi_t0, (10.0f64 / 3.0).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(
            sv.phi_dd,
            -(9.0 / 10.0) * (10.0f64 / 3.0).sqrt(),
            epsilon = 1e-8
        );
        for other in [
            sv.terms.lmu_square,
            sv.terms.b_square,
            sv.terms.c_square,
            sv.terms.ab_cross,
            sv.terms.ac_cross,
            sv.terms.bc_cross,
            sv.surface_transport,
        ] {
            assert!(other.abs() < 1e-10, "expected vanishing term, got {other}");
        }
    }

    #[test]
    fn disc_formula_matches_finite_differences_off_center() {
        // At t0 = 0.5 every pathway is active: B, C, the cross terms and the
        // transport cancellation. Exact value: (1/gamma) phi''/phi = -218/81.
        let p = disc_problem();
        let sv = second_variation(&p, 0.5).unwrap();
        assert_abs_diff_eq!(sv.value, -218.0 / 81.0, epsilon = 1e-9);
        let spec = QuadratureSpec::default();
        let phi = |t: f64| p.phi(t, &spec).unwrap().value;
        let (fd, _) = num::second_derivative_refined(phi, 0.5, 1e-3);
        assert_abs_diff_eq!(sv.phi_dd, fd, epsilon = 1e-5 * (1.0 + fd.abs()));
        assert!(sv.surface_transport.abs() > 0.1, "transport term should be active");
        assert!(sv.solver_residual < 1e-9);
    }

    #[test]
    fn frozen_product_domain_has_zero_second_variation() {
        let grid = StdArc::new(DirectionGrid::standard(1).unwrap());
        let family =
            ConvexDomainFamily::radial(grid, RadiusFn::Const { r: 1.0 }, (0.0, 1.0)).unwrap();
        let cap = ConcaveFn::constant(1.0, 1).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Lebesgue, 1).unwrap();
        let p = MarginalProblem::new(family, cap, 1.0, mu).unwrap();
        let sv = second_variation(&p, 0.5).unwrap();
        assert!(sv.value.abs() < 1e-12, "value {}", sv.value);
    }

    #[test]
    fn radial_disc_gaussian_formula_matches_finite_differences() {
        // n = 2, growing disc under the gaussian weight, t-independent cap.
        let grid = StdArc::new(DirectionGrid::standard(2).unwrap());
        let family = ConvexDomainFamily::radial(
            grid,
            RadiusFn::Affine { a: 1.0, b: 0.2 },
            (-1.0, 1.0),
        )
        .unwrap();
        let cap = ConcaveFn::radial_quad_cap(3.0, 0.0, 0.0, 1.0, 2).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Gaussian, 2).unwrap();
        let p = MarginalProblem::new(family, cap, 2.0, mu).unwrap();
        let sv = second_variation(&p, 0.25).unwrap();
        let spec = QuadratureSpec::default();
        let phi = |t: f64| p.phi(t, &spec).unwrap().value;
        let (fd, disc) = num::second_derivative_refined(phi, 0.25, 0.01);
        assert!(disc < 1e-4, "stencil disagreement {disc}");
        assert_abs_diff_eq!(sv.phi_dd, fd, epsilon = 1e-4 * (1.0 + fd.abs()));
    }

    #[test]
    fn nonpositive_cap_is_rejected() {
        let grid = StdArc::new(DirectionGrid::standard(1).unwrap());
        let family =
            ConvexDomainFamily::radial(grid, RadiusFn::Const { r: 2.0 }, (-1.0, 1.0)).unwrap();
        // Cap 1 - x^2 vanishes inside the section of radius 2.
        let cap = ConcaveFn::radial_quad_cap(1.0, 0.0, 0.0, 1.0, 1).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Lebesgue, 1).unwrap();
        let p = MarginalProblem::new(family, cap, 1.0, mu).unwrap();
        let err = second_variation(&p, 0.0);
        assert!(matches!(err, Err(Error::NotPositive(_))));
    }

    #[test]
    fn missing_kinematics_for_general_bodies() {
        // A cuboid family has no radius profile in n = 2.
        let grid = StdArc::new(DirectionGrid::standard(2).unwrap());
        let k = crate::geometry::SymmetricBody::cuboid(grid.clone(), [1.0, 0.5, 0.0]).unwrap();
        let l = crate::geometry::SymmetricBody::ball(grid, 1.0).unwrap();
        let family = ConvexDomainFamily::minkowski(k, l).unwrap();
        let cap = ConcaveFn::constant(1.0, 2).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Lebesgue, 2).unwrap();
        let p = MarginalProblem::new(family, cap, 1.0, mu).unwrap();
        let err = second_variation(&p, 0.5);
        assert!(matches!(err, Err(Error::MissingKinematics(_))));
    }
}
