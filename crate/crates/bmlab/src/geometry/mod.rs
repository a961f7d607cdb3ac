//! Convex geometry: direction grids, origin-symmetric bodies, section
//! families, concave caps and the boundary-vanishing concave extension.

mod body;
mod concave;
mod extension;
mod family;
mod grid;

pub use body::{minkowski_combine, BodyFamily, SymmetricBody};
pub use concave::{ConcaveFn, FrozenCap, Mat4, Vec4, MAT4_ZERO};
pub use extension::concave_extension;
pub use family::{ConvexDomainFamily, RadiusFn};
pub use grid::DirectionGrid;
