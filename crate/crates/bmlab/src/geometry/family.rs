//! One-parameter families of convex sections t -> Omega_t.
//!
//! Three constructions cover the laboratory: Minkowski interpolation between
//! two bodies, an explicit radius profile (balls/intervals), and super-level
//! sets {x : Phi(t, x) >= level} of a quadratic cap. Sections may be empty;
//! emptiness is a value, not an error.

use crate::geometry::body::SymmetricBody;
use crate::geometry::concave::ConcaveFn;
use crate::geometry::grid::DirectionGrid;
use crate::geometry::minkowski_combine;
use crate::{Error, Result};
use std::sync::Arc;

/// Scalar radius profile r(t) with analytic derivatives.
#[derive(Debug, Clone)]
pub enum RadiusFn {
    Const { r: f64 },
    /// r(t) = a + b t.
    Affine { a: f64, b: f64 },
    /// r(t) = s (c0 + c1 t + c2 t^2)^e on {c0 + c1 t + c2 t^2 > 0}.
    PowQuad { s: f64, e: f64, c0: f64, c1: f64, c2: f64 },
}

impl RadiusFn {
    /// Radius at t, or None where the profile is undefined or nonpositive.
    pub fn r(&self, t: f64) -> Option<f64> {
        let v = match self {
            RadiusFn::Const { r } => *r,
            RadiusFn::Affine { a, b } => a + b * t,
            RadiusFn::PowQuad { s, e, c0, c1, c2 } => {
                let q = c0 + c1 * t + c2 * t * t;
                if q <= 0.0 {
                    return None;
                }
                s * q.powf(*e)
            }
        };
        (v > 1e-12).then_some(v)
    }

    pub fn dr(&self, t: f64) -> Option<f64> {
        match self {
            RadiusFn::Const { .. } => Some(0.0),
            RadiusFn::Affine { b, .. } => Some(*b),
            RadiusFn::PowQuad { s, e, c0, c1, c2 } => {
                let q = c0 + c1 * t + c2 * t * t;
                if q <= 0.0 {
                    return None;
                }
                Some(s * e * q.powf(e - 1.0) * (c1 + 2.0 * c2 * t))
            }
        }
    }

    pub fn ddr(&self, t: f64) -> Option<f64> {
        match self {
            RadiusFn::Const { .. } | RadiusFn::Affine { .. } => Some(0.0),
            RadiusFn::PowQuad { s, e, c0, c1, c2 } => {
                let q = c0 + c1 * t + c2 * t * t;
                if q <= 0.0 {
                    return None;
                }
                let dq = c1 + 2.0 * c2 * t;
                Some(s * e * ((e - 1.0) * q.powf(e - 2.0) * dq * dq + q.powf(e - 1.0) * 2.0 * c2))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum ConvexDomainFamily {
    /// Section at t is t K + (1 - t) L, t in [0, 1].
    Minkowski { k: SymmetricBody, l: SymmetricBody },
    /// Section at t is r(t) B^n.
    Radial {
        grid: Arc<DirectionGrid>,
        r: RadiusFn,
        t_range: (f64, f64),
    },
    /// Section at t is {x : phi(t, x) >= level} for a quadratic cap phi.
    SuperLevel {
        grid: Arc<DirectionGrid>,
        phi: ConcaveFn,
        level: f64,
        t_range: (f64, f64),
    },
}

impl ConvexDomainFamily {
    pub fn minkowski(k: SymmetricBody, l: SymmetricBody) -> Result<Self> {
        if !k.grid().compatible(l.grid()) {
            return Err(Error::GridMismatch(
                "Minkowski endpoints live on different grids".into(),
            ));
        }
        Ok(ConvexDomainFamily::Minkowski { k, l })
    }

    pub fn radial(grid: Arc<DirectionGrid>, r: RadiusFn, t_range: (f64, f64)) -> Result<Self> {
        if t_range.0 >= t_range.1 {
            return Err(Error::OutOfRange(format!(
                "empty t range [{}, {}]",
                t_range.0, t_range.1
            )));
        }
        Ok(ConvexDomainFamily::Radial { grid, r, t_range })
    }

    /// Super-level family of a quadratic cap. The x block must be even and
    /// positive definite so that sections are symmetric bounded ellipsoids.
    pub fn super_level(
        grid: Arc<DirectionGrid>,
        phi: ConcaveFn,
        level: f64,
        t_range: (f64, f64),
    ) -> Result<Self> {
        let n = grid.dim();
        let ConcaveFn::QuadCap { q, dim, .. } = &phi else {
            return Err(Error::IncompatibleData(
                "super-level families require a quadratic cap".into(),
            ));
        };
        if *dim != n {
            return Err(Error::GridMismatch(format!(
                "cap dimension {dim} vs grid dimension {n}"
            )));
        }
        if !phi.is_even_in_x() {
            return Err(Error::NotEven("cap couples t and x or has a linear x part".into()));
        }
        // The x block must be positive definite for bounded sections.
        let mut xmin = f64::INFINITY;
        for d in 1..=n {
            xmin = xmin.min(q[d][d]);
        }
        if xmin <= 0.0 {
            return Err(Error::NotPositive(
                "super-level cap needs a positive definite x block".into(),
            ));
        }
        Ok(ConvexDomainFamily::SuperLevel { grid, phi, level, t_range })
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        match self {
            ConvexDomainFamily::Minkowski { k, .. } => k.grid(),
            ConvexDomainFamily::Radial { grid, .. } => grid,
            ConvexDomainFamily::SuperLevel { grid, .. } => grid,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    /// Scan range for profiles.
    pub fn t_range(&self) -> (f64, f64) {
        match self {
            ConvexDomainFamily::Minkowski { .. } => (0.0, 1.0),
            ConvexDomainFamily::Radial { t_range, .. } => *t_range,
            ConvexDomainFamily::SuperLevel { t_range, .. } => *t_range,
        }
    }

    /// The section body at t; None when the section is empty.
    pub fn section(&self, t: f64) -> Result<Option<SymmetricBody>> {
        match self {
            ConvexDomainFamily::Minkowski { k, l } => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::OutOfRange(format!(
                        "Minkowski parameter {t} outside [0, 1]"
                    )));
                }
                Ok(Some(minkowski_combine(k, l, t)?))
            }
            ConvexDomainFamily::Radial { grid, r, .. } => match r.r(t) {
                Some(rad) => Ok(Some(SymmetricBody::ball(grid.clone(), rad)?)),
                None => Ok(None),
            },
            ConvexDomainFamily::SuperLevel { grid, phi, level, .. } => {
                let ConcaveFn::QuadCap { c, lin, q, .. } = phi else { unreachable!() };
                let n = grid.dim();
                // Phi(t, x) >= level  <=>  <x, Qx x> <= c + lin_t t - q_tt t^2 - level.
                let resid = c + lin[0] * t - q[0][0] * t * t - level;
                if resid <= 1e-12 {
                    return Ok(None);
                }
                // Section support: h(theta)^2 = resid * <theta, Qx^{-1} theta>.
                let mut mx = crate::num::MAT3_ZERO;
                for i in 0..n {
                    for j in 0..n {
                        mx[i][j] = q[i + 1][j + 1];
                    }
                }
                let nm = nalgebra::Matrix3::from_fn(|i, j| {
                    if i < n && j < n {
                        mx[i][j]
                    } else if i == j {
                        1.0
                    } else {
                        0.0
                    }
                });
                let inv = nm.try_inverse().ok_or_else(|| {
                    Error::NotPositive("super-level cap x block is singular".into())
                })?;
                let mut m = crate::num::MAT3_ZERO;
                for i in 0..n {
                    for j in 0..n {
                        m[i][j] = resid * inv[(i, j)];
                    }
                }
                Ok(Some(SymmetricBody::ellipsoid(grid.clone(), m)?))
            }
        }
    }

    /// Radius profile when every section is a ball (or interval), which is
    /// what the second-variation kinematics require.
    pub fn radius_profile(&self) -> Option<RadiusFn> {
        match self {
            ConvexDomainFamily::Radial { r, .. } => Some(r.clone()),
            ConvexDomainFamily::Minkowski { k, l } => {
                if k.dim() != 1 {
                    // A pair of balls also reduces in higher dimension.
                    use crate::geometry::body::BodyFamily;
                    match (k.family(), l.family()) {
                        (Some(BodyFamily::Ball { r: rk }), Some(BodyFamily::Ball { r: rl })) => {
                            Some(RadiusFn::Affine { a: *rl, b: rk - rl })
                        }
                        _ => None,
                    }
                } else {
                    // Every symmetric 1-D body is the interval [-h, h].
                    let rk = k.support_values()[0];
                    let rl = l.support_values()[0];
                    Some(RadiusFn::Affine { a: rl, b: rk - rl })
                }
            }
            ConvexDomainFamily::SuperLevel { phi, level, .. } => {
                let ConcaveFn::QuadCap { c, lin, q, dim } = phi else { return None };
                let n = *dim;
                // Isotropic x block only.
                let b = q[1][1];
                for i in 1..=n {
                    for j in 1..=n {
                        let want = if i == j { b } else { 0.0 };
                        if (q[i][j] - want).abs() > 1e-14 {
                            return None;
                        }
                    }
                }
                // r(t) = sqrt((c - level + lin_t t - q_tt t^2) / b).
                Some(RadiusFn::PowQuad {
                    s: 1.0 / b.sqrt(),
                    e: 0.5,
                    c0: c - level,
                    c1: lin[0],
                    c2: -q[0][0],
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::standard(n).unwrap())
    }

    #[test]
    fn disc_superlevel_reduces_to_circle_profile() {
        // Phi = 2 - t^2 - x^2, level 1: sections are |x| <= sqrt(1 - t^2).
        let phi = ConcaveFn::radial_quad_cap(2.0, 1.0, 0.0, 1.0, 1).unwrap();
        let fam = ConvexDomainFamily::super_level(grid(1), phi, 1.0, (-1.0, 1.0)).unwrap();
        let r = fam.radius_profile().unwrap();
        assert_abs_diff_eq!(r.r(0.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.r(0.5).unwrap(), 0.75f64.sqrt(), epsilon = 1e-14);
        assert!(fam.section(0.999).unwrap().is_some());
        assert!(fam.section(1.5).unwrap().is_none());
        assert_abs_diff_eq!(r.dr(0.5).unwrap(), -0.5 / 0.75f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.ddr(0.5).unwrap(),
            -1.0 / 0.75f64.powf(1.5),
            epsilon = 1e-12
        );
    }

    #[test]
    fn minkowski_interval_path_is_affine() {
        let g = grid(1);
        let k = SymmetricBody::ball(g.clone(), 2.0).unwrap();
        let l = SymmetricBody::ball(g, 0.5).unwrap();
        let fam = ConvexDomainFamily::minkowski(k, l).unwrap();
        let r = fam.radius_profile().unwrap();
        assert_abs_diff_eq!(r.r(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.r(1.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.dr(0.3).unwrap(), 1.5, epsilon = 1e-15);
        assert!(fam.section(1.2).is_err());
    }

    #[test]
    fn anisotropic_superlevel_sections_are_ellipsoids() {
        let mut q = crate::geometry::concave::MAT4_ZERO;
        q[0][0] = 1.0;
        q[1][1] = 1.0;
        q[2][2] = 4.0;
        let phi = ConcaveFn::quad_cap(3.0, [0.0; 4], q, 2).unwrap();
        let fam =
            ConvexDomainFamily::super_level(grid(2), phi, 1.0, (-1.4, 1.4)).unwrap();
        assert!(fam.radius_profile().is_none());
        let sec = fam.section(0.0).unwrap().unwrap();
        // h(e1)^2 = 2 / 1, h(e2)^2 = 2 / 4.
        assert_abs_diff_eq!(sec.support(&[1.0, 0.0, 0.0]), 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(sec.support(&[0.0, 1.0, 0.0]), (0.5f64).sqrt(), epsilon = 1e-12);
    }
}
