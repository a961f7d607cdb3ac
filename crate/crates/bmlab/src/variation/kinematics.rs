//! Boundary kinematics of an evolving radial section.
//!
//! For interval sections Sigma_t = {-r(t), r(t)} and for radial sections
//! Sigma_t = r(t) S^{n-1}, the support function in every fixed normal
//! direction is h(t) = r(t), so the normal speed of the boundary is r'(t)
//! in each direction and its t-acceleration is r''(t).

use serde::Serialize;

use crate::geometry::{ConvexDomainFamily, RadiusFn};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryKinematics {
    pub dim: usize,
    /// Section radius at the base parameter.
    pub r0: f64,
    /// Normal speed psi = r'(t0), shared by every boundary point.
    pub psi: f64,
    /// Normal acceleration d/dt psi_t at t0, i.e. r''(t0).
    pub psi_dot: f64,
}

impl BoundaryKinematics {
    pub fn new(dim: usize, r0: f64, psi: f64, psi_dot: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::OutOfRange(format!("dimension {dim} not in 1..=3")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::NotPositive(format!("section radius {r0}")));
        }
        Ok(BoundaryKinematics { dim, r0, psi, psi_dot })
    }

    /// A section frozen in t: psi = psi_dot = 0.
    pub fn fixed(dim: usize, r0: f64) -> Result<Self> {
        Self::new(dim, r0, 0.0, 0.0)
    }

    pub fn from_radius_profile(r: &RadiusFn, t0: f64, dim: usize) -> Result<Self> {
        let (Some(r0), Some(psi), Some(psi_dot)) = (r.r(t0), r.dr(t0), r.ddr(t0)) else {
            return Err(Error::MissingKinematics(format!(
                "radius profile undefined at t = {t0}"
            )));
        };
        Self::new(dim, r0, psi, psi_dot)
    }

    /// Kinematics of a domain family whose sections are balls or intervals.
    pub fn from_family(family: &ConvexDomainFamily, t0: f64) -> Result<Self> {
        let profile = family.radius_profile().ok_or_else(|| {
            Error::MissingKinematics(
                "family sections are not balls; no radius profile".into(),
            )
        })?;
        Self::from_radius_profile(&profile, t0, family.dim())
    }

    /// Second fundamental form of the section sphere; absent for intervals.
    pub fn second_fundamental_form(&self) -> Option<f64> {
        (self.dim >= 2).then(|| 1.0 / self.r0)
    }

    /// Weighted mean curvature tr II - dG/dnu for a density e^{-G} whose
    /// outward normal derivative at the boundary is `dg_normal`.
    pub fn weighted_mean_curvature(&self, dg_normal: f64) -> f64 {
        (self.dim as f64 - 1.0) / self.r0 - dg_normal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn affine_profile_has_zero_acceleration() {
        let r = RadiusFn::Affine { a: 1.0, b: 0.25 };
        let k = BoundaryKinematics::from_radius_profile(&r, 0.8, 2).unwrap();
        assert_abs_diff_eq!(k.r0, 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(k.psi, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(k.psi_dot, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.second_fundamental_form().unwrap(), 1.0 / 1.2, epsilon = 1e-15);
    }

    #[test]
    fn circle_profile_kinematics() {
        // r(t) = sqrt(1 - t^2): r' = -t/r, r'' = -1/r^3.
        let r = RadiusFn::PowQuad { s: 1.0, e: 0.5, c0: 1.0, c1: 0.0, c2: -1.0 };
        let k = BoundaryKinematics::from_radius_profile(&r, 0.5, 1).unwrap();
        let rad = 0.75f64.sqrt();
        assert_abs_diff_eq!(k.r0, rad, epsilon = 1e-14);
        assert_abs_diff_eq!(k.psi, -0.5 / rad, epsilon = 1e-14);
        assert_abs_diff_eq!(k.psi_dot, -1.0 / rad.powi(3), epsilon = 1e-13);
        assert!(k.second_fundamental_form().is_none());
    }

    #[test]
    fn vanished_section_is_missing_kinematics() {
        let r = RadiusFn::PowQuad { s: 1.0, e: 0.5, c0: 1.0, c1: 0.0, c2: -1.0 };
        let err = BoundaryKinematics::from_radius_profile(&r, 2.0, 1);
        assert!(matches!(err, Err(Error::MissingKinematics(_))));
    }
}
