//! Boundary speed of a super-level-set family. On the moving boundary the
//! defining function is constant, so dtPhi = delta psi with
//! delta = -<grad_x Phi, outward normal> = |grad_x Phi|.

use crate::geometry::ConcaveFn;
use crate::num;
use crate::variation::kinematics::BoundaryKinematics;
use crate::{Error, Point, Result};

/// Evaluate delta at a boundary point y and verify the kinematic identity
/// dtPhi(t0, y) = delta * psi against the supplied kinematics.
pub fn level_set_delta(
    cap: &ConcaveFn,
    t0: f64,
    kin: &BoundaryKinematics,
    y: &Point,
) -> Result<f64> {
    let r = num::norm(y);
    if (r - kin.r0).abs() > 1e-9 * kin.r0 {
        return Err(Error::LevelSetMismatch(format!(
            "point radius {r} vs boundary radius {}",
            kin.r0
        )));
    }
    let normal = num::scale(y, 1.0 / r);
    let delta = -num::dot(&cap.grad_x(t0, y), &normal);
    if delta < -1e-10 {
        return Err(Error::LevelSetMismatch(format!(
            "outward slope {delta} is negative; y is not on a decreasing level set"
        )));
    }
    let dt = cap.dt(t0, y);
    let want = delta * kin.psi;
    if (dt - want).abs() > 1e-8 * (1.0 + dt.abs() + want.abs()) {
        return Err(Error::LevelSetMismatch(format!(
            "dtPhi = {dt} but delta psi = {want}; kinematics do not match the level set"
        )));
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadiusFn;
    use approx::assert_abs_diff_eq;

    fn disc_cap() -> ConcaveFn {
        ConcaveFn::radial_quad_cap(1.0, 1.0, 0.0, 1.0, 1).unwrap()
    }

    #[test]
    fn unit_disc_at_center_time() {
        let cap = disc_cap();
        let kin = BoundaryKinematics::from_radius_profile(
            &RadiusFn::PowQuad { s: 1.0, e: 0.5, c0: 1.0, c1: 0.0, c2: -1.0 },
            0.0,
            1,
        )
        .unwrap();
        let d = level_set_delta(&cap, 0.0, &kin, &[1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn shrinking_disc_satisfies_the_speed_identity() {
        let cap = disc_cap();
        let kin = BoundaryKinematics::from_radius_profile(
            &RadiusFn::PowQuad { s: 1.0, e: 0.5, c0: 1.0, c1: 0.0, c2: -1.0 },
            0.5,
            1,
        )
        .unwrap();
        let r = 0.75f64.sqrt();
        let d = level_set_delta(&cap, 0.5, &kin, &[r, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(d, 3.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn off_boundary_point_is_rejected() {
        let cap = disc_cap();
        let kin = BoundaryKinematics::fixed(1, 1.0).unwrap();
        let err = level_set_delta(&cap, 0.0, &kin, &[0.5, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::LevelSetMismatch(_))));
    }

    #[test]
    fn stationary_kinematics_against_a_drifting_cap() {
        // Phi = 2 - t - x^2 moves its level set, but the kinematics say the
        // boundary stands still.
        let cap = ConcaveFn::radial_quad_cap(2.0, 0.0, 1.0, 1.0, 1).unwrap();
        let kin = BoundaryKinematics::fixed(1, 1.0).unwrap();
        let err = level_set_delta(&cap, 0.0, &kin, &[1.0, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::LevelSetMismatch(_))));
    }
}
