//! Integrated Bochner identity with Neumann boundary terms on interval and
//! radial-ball geometries.
//!
//! For nu proportional to e^{-g} and a radial/even profile u,
//!   int (L_nu u)^2 dnu = int (|Hess u|^2 + <Hess g grad u, grad u>) dnu
//!                        + int_Sigma H_nu psi^2 dnu
//! with psi the outward normal derivative of u and H_nu the nu-weighted mean
//! curvature tr II - <grad g, normal>. Tangential terms drop out because the
//! data has no variation along the boundary.

use crate::variation::{surface_integral, volume_integral, OneDimGeometry};

#[derive(Clone, Copy, Debug)]
pub struct BochnerSides {
    /// int (L_nu u)^2 dnu.
    pub lhs: f64,
    /// int (|Hess u|^2 + <Hess g grad u, grad u>) dnu.
    pub rhs_bulk: f64,
    /// int_Sigma H_nu psi^2 dnu.
    pub rhs_boundary: f64,
}

impl BochnerSides {
    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs_bulk - self.rhs_boundary
    }
}

/// Evaluate both sides of the identity for the potential g (as a function of
/// the line coordinate) and the profile derivatives du, ddu.
pub fn bochner_sides(
    geom: &OneDimGeometry,
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    ddg: &dyn Fn(f64) -> f64,
    du: &dyn Fn(f64) -> f64,
    ddu: &dyn Fn(f64) -> f64,
) -> BochnerSides {
    let n = geom.dim() as f64;
    let dens = |c: f64| (-g(c)).exp();
    let mass = volume_integral(geom, &dens);
    let lnu = |c: f64| {
        let curv = match geom {
            OneDimGeometry::Interval { .. } => 0.0,
            OneDimGeometry::RadialBall { .. } => (n - 1.0) / c,
        };
        ddu(c) + curv * du(c) - dg(c) * du(c)
    };
    let lhs = volume_integral(geom, &|c| {
        let v = lnu(c);
        v * v * dens(c)
    }) / mass;
    let rhs_bulk = volume_integral(geom, &|c| {
        let d = du(c);
        let trans = if geom.dim() >= 2 { (n - 1.0) * (d / c) * (d / c) } else { 0.0 };
        (ddu(c) * ddu(c) + trans + ddg(c) * d * d) * dens(c)
    }) / mass;
    let rhs_boundary = match geom {
        OneDimGeometry::Interval { r0 } => {
            // Outward normal is +1 at the right endpoint, -1 at the left.
            let psi_r = du(*r0);
            let psi_l = -du(-r0);
            let h_r = -dg(*r0);
            let h_l = dg(-r0);
            (h_r * psi_r * psi_r * dens(*r0) + h_l * psi_l * psi_l * dens(-r0)) / mass
        }
        OneDimGeometry::RadialBall { r0, .. } => {
            let psi = du(*r0);
            let h = (n - 1.0) / r0 - dg(*r0);
            surface_integral(geom, &|c| h * psi * psi * dens(c)) / mass
        }
    };
    BochnerSides { lhs, rhs_bulk, rhs_boundary }
}

/// lhs - rhs_bulk - rhs_boundary; vanishes for smooth data up to quadrature.
pub fn bochner_residual(
    geom: &OneDimGeometry,
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    ddg: &dyn Fn(f64) -> f64,
    du: &dyn Fn(f64) -> f64,
    ddu: &dyn Fn(f64) -> f64,
) -> f64 {
    bochner_sides(geom, g, dg, ddg, du, ddu).residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_profile_gives_zero_everywhere() {
        let geom = OneDimGeometry::Interval { r0: 1.5 };
        let s = bochner_sides(
            &geom,
            &|c| 0.5 * c * c,
            &|c| c,
            &|_| 1.0,
            &|_| 0.0,
            &|_| 0.0,
        );
        assert_eq!(s.lhs, 0.0);
        assert_eq!(s.rhs_bulk, 0.0);
        assert_eq!(s.rhs_boundary, 0.0);
    }

    #[test]
    fn cubic_on_uniform_interval_balances_at_one_third() {
        // u = x^3/6 - x/2 has u'(+-1) = 0, so the boundary term drops and
        // both sides equal int x^2 dnu = 1/3 for uniform nu on [-1, 1].
        let geom = OneDimGeometry::Interval { r0: 1.0 };
        let s = bochner_sides(
            &geom,
            &|_| 0.0,
            &|_| 0.0,
            &|_| 0.0,
            &|c| 0.5 * c * c - 0.5,
            &|c| c,
        );
        assert_abs_diff_eq!(s.lhs, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.rhs_bulk, 1.0 / 3.0, epsilon = 1e-12);
        assert!(s.rhs_boundary.abs() < 1e-14);
        assert!(s.residual().abs() < 1e-10);
    }

    #[test]
    fn gaussian_square_profile_balances_at_two() {
        // u = x^2/2 under the gaussian: both sides are E(1 - x^2)^2 = 2; the
        // boundary at |x| = 8 carries weight e^{-32} and is negligible.
        let geom = OneDimGeometry::Interval { r0: 8.0 };
        let s = bochner_sides(
            &geom,
            &|c| 0.5 * c * c,
            &|c| c,
            &|_| 1.0,
            &|c| c,
            &|_| 1.0,
        );
        assert_abs_diff_eq!(s.lhs, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.rhs_bulk, 2.0, epsilon = 1e-9);
        assert!(s.residual().abs() < 1e-8);
    }

    #[test]
    fn radial_square_profile_splits_bulk_and_boundary() {
        // u = r^2 on the unit disc, flat weight: L u = 4 so the left side is
        // 16; the right side splits 8 bulk plus 8 from H psi^2 = 1 * 4 with
        // surface mass 2 relative to the disc.
        let geom = OneDimGeometry::RadialBall { r0: 1.0, dim: 2 };
        let s = bochner_sides(&geom, &|_| 0.0, &|_| 0.0, &|_| 0.0, &|c| 2.0 * c, &|_| 2.0);
        assert_abs_diff_eq!(s.lhs, 16.0, epsilon = 1e-11);
        assert_abs_diff_eq!(s.rhs_bulk, 8.0, epsilon = 1e-11);
        assert_abs_diff_eq!(s.rhs_boundary, 8.0, epsilon = 1e-11);
        assert!(s.residual().abs() < 1e-10);
    }
}
