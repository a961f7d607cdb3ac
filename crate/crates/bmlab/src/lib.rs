//! Numerical laboratory for concavity properties of weighted marginals.
//!
//! The library works at desk scale (ambient section dimension n <= 3) and is
//! organised around one pipeline: build a convex domain family and a concave
//! weight function on it, integrate against a rotationally invariant measure,
//! and interrogate the resulting marginal profile t -> (int_{Omega_t} Phi^beta dmu)^gamma
//! both by direct finite differences and by an exact second-variation formula
//! driven by a one-dimensional elliptic Neumann solve.
//!
//! Conventions used throughout:
//! * points are `[f64; 3]` with unused trailing coordinates equal to zero;
//!   the active dimension always travels alongside the data that owns it;
//! * all bodies are origin-symmetric and described by support functions;
//! * weights are radial, `dmu = exp(-w(|x|)) dx`.

pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod integrate;
pub mod marginals;
pub mod measures;
pub mod num;
pub mod search;
pub mod variation;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// A point of R^n, n <= 3. Coordinates beyond the active dimension are zero.
pub type Point = [f64; 3];

/// A symmetric n x n matrix block stored dense, n <= 3.
pub type Mat3 = [[f64; 3]; 3];

/// Scalar field with analytic first and second derivatives, the common
/// currency of the differential operators in [`measures`] and [`variation`].
pub trait ScalarC2: Sync {
    fn value(&self, x: &Point) -> f64;
    fn grad(&self, x: &Point) -> Point;
    fn hess(&self, x: &Point) -> Mat3;
}
