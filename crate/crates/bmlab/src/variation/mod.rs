//! Second-variation machinery on geometries where the weighted Neumann
//! problem reduces to one-dimensional quadrature: symmetric intervals (n = 1)
//! and radial balls (n = 2, 3).
//!
//! The module houses the boundary kinematics of evolving sections, the
//! integrating-factor Neumann solver, the term-by-term assembly of the
//! second-derivative formula for marginal profiles, the Bochner-Reilly
//! residual, and the hereditary/spectral margins.

pub mod bochner;
pub mod kinematics;
pub mod level_set;
pub mod margins;
pub mod neumann;
pub mod second;

pub use bochner::{bochner_residual, bochner_sides, BochnerSides};
pub use kinematics::BoundaryKinematics;
pub use level_set::level_set_delta;
pub use margins::{hereditary_margin, spectral_margin};
pub use neumann::{solve_neumann, NeumannData, NeumannSolution};
pub use second::{second_variation, second_variation_rhs, SecondVariation, VariationTerms};

use crate::num;

/// Coordinate domain of the reduced one-dimensional problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OneDimGeometry {
    /// [-r0, r0] in R^1; the coordinate is the signed x.
    Interval { r0: f64 },
    /// Ball of radius r0 in R^dim (dim 2 or 3); the coordinate is r in [0, r0].
    RadialBall { r0: f64, dim: usize },
}

impl OneDimGeometry {
    pub fn r0(&self) -> f64 {
        match self {
            OneDimGeometry::Interval { r0 } => *r0,
            OneDimGeometry::RadialBall { r0, .. } => *r0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OneDimGeometry::Interval { .. } => 1,
            OneDimGeometry::RadialBall { dim, .. } => *dim,
        }
    }

    pub(crate) fn coord_range(&self) -> (f64, f64) {
        match self {
            OneDimGeometry::Interval { r0 } => (-r0, *r0),
            OneDimGeometry::RadialBall { r0, .. } => (0.0, *r0),
        }
    }

    /// Surface area of the unit sphere in the ambient dimension (the angular
    /// factor of radial integrals); 1 for the interval coordinate.
    pub(crate) fn angular_factor(&self) -> f64 {
        match self {
            OneDimGeometry::Interval { .. } => 1.0,
            OneDimGeometry::RadialBall { dim: 2, .. } => std::f64::consts::TAU,
            OneDimGeometry::RadialBall { .. } => 2.0 * std::f64::consts::TAU,
        }
    }

    /// Radial Jacobian at the coordinate c.
    pub(crate) fn jacobian(&self, c: f64) -> f64 {
        match self {
            OneDimGeometry::Interval { .. } => 1.0,
            OneDimGeometry::RadialBall { dim, .. } => c.powi(*dim as i32 - 1),
        }
    }

    pub(crate) fn from_dim(dim: usize, r0: f64) -> Self {
        if dim == 1 {
            OneDimGeometry::Interval { r0 }
        } else {
            OneDimGeometry::RadialBall { r0, dim }
        }
    }
}

pub(crate) const LINE_CELLS: usize = 512;
pub(crate) const LINE_ORDER: usize = 16;

/// Integral of f over the geometry with its volume Jacobian (angular factor
/// included), by composite Gauss quadrature.
pub(crate) fn volume_integral(geom: &OneDimGeometry, f: &dyn Fn(f64) -> f64) -> f64 {
    let (lo, hi) = geom.coord_range();
    let ang = geom.angular_factor();
    num::integrate_fn(|c| f(c) * geom.jacobian(c), lo, hi, LINE_CELLS, LINE_ORDER) * ang
}

/// Integral of f over the boundary with its surface Jacobian: the two
/// endpoint values for the interval, the outer sphere for the ball.
pub(crate) fn surface_integral(geom: &OneDimGeometry, f: &dyn Fn(f64) -> f64) -> f64 {
    match geom {
        OneDimGeometry::Interval { r0 } => f(-r0) + f(*r0),
        OneDimGeometry::RadialBall { r0, .. } => {
            geom.angular_factor() * geom.jacobian(*r0) * f(*r0)
        }
    }
}

/// L_mu of a profile u on the line coordinate: the interval keeps the sign of
/// the coordinate in the drift, the ball adds the radial curvature term.
pub(crate) fn lmu_on_line(
    mu: &crate::measures::WeightedMeasure,
    geom: &OneDimGeometry,
    c: f64,
    du: f64,
    ddu: f64,
) -> f64 {
    match geom {
        OneDimGeometry::Interval { .. } => {
            let s = if c >= 0.0 { 1.0 } else { -1.0 };
            ddu - mu.weight.dw(c.abs()) * s * du
        }
        OneDimGeometry::RadialBall { dim, .. } => {
            ddu + (*dim as f64 - 1.0) * du / c - mu.weight.dw(c) * du
        }
    }
}
