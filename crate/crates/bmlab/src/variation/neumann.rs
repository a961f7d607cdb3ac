//! Weighted Neumann solves by integrating factors.
//!
//! For a line density e^{-G} the equation L_nu u = u'' - G' u' = f turns into
//! (e^{-G} u')' = f e^{-G}; on a radial ball the factor picks up the r^{n-1}
//! Jacobian. Either way u' is a single cumulative quadrature and u a second
//! one, so smooth data is resolved to near machine precision.

use std::sync::Arc;

use crate::num::{self, Cumulative};
use crate::variation::OneDimGeometry;
use crate::{Error, Result};

/// Outward normal derivative data on the boundary.
#[derive(Clone, Copy, Debug)]
pub enum NeumannData {
    /// du/dnu at -r0 (i.e. -u'(-r0)) and at +r0 (i.e. u'(r0)).
    Interval { left: f64, right: f64 },
    /// u'(r0) on the outer sphere.
    Radial { outer: f64 },
}

impl NeumannData {
    /// The same normal derivative on every boundary component.
    pub fn uniform(geom: &OneDimGeometry, psi: f64) -> Self {
        match geom {
            OneDimGeometry::Interval { .. } => NeumannData::Interval { left: psi, right: psi },
            OneDimGeometry::RadialBall { .. } => NeumannData::Radial { outer: psi },
        }
    }
}

pub struct NeumannSolution {
    pub geometry: OneDimGeometry,
    /// Sample grid over the coordinate range.
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Normal derivative actually achieved on the boundary.
    pub achieved: NeumannData,
    /// Difference of the two sides of the solvability condition, in
    /// nu-probability units.
    pub compat_defect: f64,
    /// Sup of |L_nu u - f| on interior check points, with u'' recovered by an
    /// independent finite difference of u'.
    pub residual: f64,
    u_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    du_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ddu_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl NeumannSolution {
    pub fn u_at(&self, c: f64) -> f64 {
        (self.u_fn.as_ref())(c)
    }

    pub fn du_at(&self, c: f64) -> f64 {
        (self.du_fn.as_ref())(c)
    }

    /// u'' from the equation itself (exact given u').
    pub fn ddu_at(&self, c: f64) -> f64 {
        (self.ddu_fn.as_ref())(c)
    }
}

const GRID_POINTS: usize = 513;
const COMPAT_TOL: f64 = 1e-8;

/// Solve L_nu u = f with Neumann data on an interval or radial ball, where
/// dnu is proportional to e^{-G} against the geometry's volume element.
/// `g` and `dg` are the potential G and its derivative on the coordinate.
/// The solution is gauged by u(0) = 0.
pub fn solve_neumann<G, DG, F>(
    geometry: OneDimGeometry,
    g: G,
    dg: DG,
    f: F,
    data: NeumannData,
) -> Result<NeumannSolution>
where
    G: Fn(f64) -> f64 + Send + Sync + 'static,
    DG: Fn(f64) -> f64 + Send + Sync + 'static,
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let r0 = geometry.r0();
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::NotPositive(format!("domain radius {r0}")));
    }
    let g = Arc::new(g);
    let dg = Arc::new(dg);
    let f = Arc::new(f);
    let (lo, hi) = geometry.coord_range();

    // Integrating factor J = jacobian * e^{-G}; flux(c) = J(c) u'(c).
    let jac = {
        let geom = geometry;
        let g = g.clone();
        move |c: f64| geom.jacobian(c) * (-(g.as_ref())(c)).exp()
    };
    let flux_rhs = {
        let jac = jac.clone();
        let f = f.clone();
        move |c: f64| jac(c) * (f.as_ref())(c)
    };
    let cum_flux = Arc::new(Cumulative::new(
        flux_rhs,
        lo,
        hi,
        super::LINE_CELLS,
        super::LINE_ORDER,
    ));
    let mass = num::integrate_fn(jac.clone(), lo, hi, super::LINE_CELLS, super::LINE_ORDER);

    // Boundary fluxes and the solvability condition int f dnu = int psi dnu_S.
    let (flux_lo, psi_surface) = match data {
        NeumannData::Interval { left, right } => {
            (-left * jac(lo), right * jac(hi) + left * jac(lo))
        }
        NeumannData::Radial { outer } => (0.0, outer * jac(hi)),
    };
    let compat_defect = (psi_surface - cum_flux.total()) / mass;
    let scale = 1.0 + (psi_surface.abs() + cum_flux.total().abs()) / mass;
    if compat_defect.abs() > COMPAT_TOL * scale {
        return Err(Error::IncompatibleData(format!(
            "solvability defect {compat_defect:.3e} exceeds {COMPAT_TOL:.0e} x scale"
        )));
    }

    let du_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync> = {
        let cum_flux = cum_flux.clone();
        let jac = jac.clone();
        match geometry {
            OneDimGeometry::Interval { .. } => {
                Arc::new(move |c: f64| (flux_lo + cum_flux.eval(c)) / jac(c))
            }
            OneDimGeometry::RadialBall { .. } => Arc::new(move |c: f64| {
                if c <= 0.0 {
                    return 0.0;
                }
                cum_flux.eval(c) / jac(c)
            }),
        }
    };
    let ddu_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync> = {
        let du_fn = du_fn.clone();
        let dg = dg.clone();
        let f = f.clone();
        let geom = geometry;
        Arc::new(move |c: f64| {
            let curv = match geom {
                OneDimGeometry::Interval { .. } => 0.0,
                OneDimGeometry::RadialBall { dim, .. } => {
                    if c > 0.0 {
                        (dim as f64 - 1.0) / c
                    } else {
                        0.0
                    }
                }
            };
            (f.as_ref())(c) + ((dg.as_ref())(c) - curv) * (du_fn.as_ref())(c)
        })
    };
    let u_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync> = {
        let du2 = du_fn.clone();
        let cum_u = Arc::new(Cumulative::new(
            move |c: f64| (du2.as_ref())(c),
            lo,
            hi,
            super::LINE_CELLS,
            super::LINE_ORDER,
        ));
        // Gauge u = 0 at the center of the geometry (x = 0 resp. r = 0).
        let center = match geometry {
            OneDimGeometry::Interval { .. } => cum_u.eval(0.0),
            OneDimGeometry::RadialBall { .. } => 0.0,
        };
        Arc::new(move |c: f64| cum_u.eval(c) - center)
    };

    let xs: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let u: Vec<f64> = xs.iter().map(|&c| (u_fn.as_ref())(c)).collect();
    let du: Vec<f64> = xs.iter().map(|&c| (du_fn.as_ref())(c)).collect();

    let achieved = match geometry {
        OneDimGeometry::Interval { .. } => NeumannData::Interval {
            left: -(du_fn.as_ref())(lo),
            right: (du_fn.as_ref())(hi),
        },
        OneDimGeometry::RadialBall { .. } => {
            NeumannData::Radial { outer: (du_fn.as_ref())(hi) }
        }
    };

    // Independent residual: finite-difference u'' vs the equation.
    let h_fd = 1e-4 * r0;
    let inner_lo = lo + 3.0 * h_fd + if matches!(geometry, OneDimGeometry::RadialBall { .. }) {
        0.01 * r0
    } else {
        0.0
    };
    let inner_hi = hi - 3.0 * h_fd;
    let mut residual = 0.0f64;
    for i in 0..257 {
        let c = inner_lo + (inner_hi - inner_lo) * i as f64 / 256.0;
        let ddu_fd = num::first_derivative(|s| (du_fn.as_ref())(s), c, h_fd);
        let curv = match geometry {
            OneDimGeometry::Interval { .. } => 0.0,
            OneDimGeometry::RadialBall { dim, .. } => (dim as f64 - 1.0) / c,
        };
        let at = (du_fn.as_ref())(c);
        let lnu = ddu_fd + curv * at - (dg.as_ref())(c) * at;
        residual = residual.max((lnu - (f.as_ref())(c)).abs());
    }

    Ok(NeumannSolution {
        geometry,
        xs,
        u,
        du,
        achieved,
        compat_defect,
        residual,
        u_fn,
        du_fn,
        ddu_fn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_interval_cubic_solution() {
        // nu uniform on [-1, 1], f(x) = x, psi = 0: u = x^3/6 - x/2.
        let sol = solve_neumann(
            OneDimGeometry::Interval { r0: 1.0 },
            |_| 0.0,
            |_| 0.0,
            |x| x,
            NeumannData::Interval { left: 0.0, right: 0.0 },
        )
        .unwrap();
        for &x in &[-0.9, -0.3, 0.0, 0.4, 1.0] {
            assert_abs_diff_eq!(sol.du_at(x), (x * x - 1.0) / 2.0, epsilon = 1e-13);
            assert_abs_diff_eq!(sol.u_at(x), x.powi(3) / 6.0 - x / 2.0, epsilon = 1e-13);
        }
        assert!(sol.compat_defect.abs() < 1e-14);
        assert!(sol.residual < 1e-9, "residual {}", sol.residual);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let sol = solve_neumann(
            OneDimGeometry::Interval { r0: 1.0 },
            |x: f64| x * x / 2.0,
            |x| x,
            |_| 0.0,
            NeumannData::Interval { left: 0.0, right: 0.0 },
        )
        .unwrap();
        let sup = sol.du.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(sup < 1e-14);
    }

    #[test]
    fn radial_disc_quadratic_solution() {
        // Lebesgue disc of radius 1: Delta(r^2) = 4, outer derivative 2.
        let sol = solve_neumann(
            OneDimGeometry::RadialBall { r0: 1.0, dim: 2 },
            |_| 0.0,
            |_| 0.0,
            |_| 4.0,
            NeumannData::Radial { outer: 2.0 },
        )
        .unwrap();
        for &r in &[0.05, 0.3, 0.7, 1.0] {
            assert_abs_diff_eq!(sol.u_at(r), r * r, epsilon = 1e-12);
            assert_abs_diff_eq!(sol.du_at(r), 2.0 * r, epsilon = 1e-12);
        }
        let NeumannData::Radial { outer } = sol.achieved else { unreachable!() };
        assert_abs_diff_eq!(outer, 2.0, epsilon = 1e-12);
        assert!(sol.residual < 1e-9, "residual {}", sol.residual);
    }

    #[test]
    fn incompatible_data_is_rejected() {
        let err = solve_neumann(
            OneDimGeometry::Interval { r0: 1.0 },
            |_| 0.0,
            |_| 0.0,
            |_| 1.0,
            NeumannData::Interval { left: 0.0, right: 0.0 },
        );
        assert!(matches!(err, Err(Error::IncompatibleData(_))));
    }

    #[test]
    fn gaussian_interval_solve_hits_tolerance() {
        // G = x^2/2; f = L_nu(x^3) = 6x - 3x^2 * x ... use u = sin(x):
        // L u = -sin - x cos, psi = du/dnu = cos(r0) at right, -cos(-r0) left.
        let r0 = 1.5f64;
        let sol = solve_neumann(
            OneDimGeometry::Interval { r0 },
            |x: f64| x * x / 2.0,
            |x| x,
            |x: f64| -x.sin() - x * x.cos(),
            NeumannData::Interval { left: -r0.cos(), right: r0.cos() },
        )
        .unwrap();
        for &x in &[-1.2, -0.5, 0.1, 0.9, 1.5] {
            assert_abs_diff_eq!(sol.du_at(x), x.cos(), epsilon = 1e-11);
            assert_abs_diff_eq!(sol.u_at(x), x.sin(), epsilon = 1e-11);
        }
        assert!(sol.residual < 1e-9, "residual {}", sol.residual);
    }
}
