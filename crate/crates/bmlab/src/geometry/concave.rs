//! Concave weight functions Phi on the joint variable z = (t, x), x in R^n.
//!
//! The joint coordinate order is t first, then the section coordinates, so
//! joint Hessians are (n+1) x (n+1) blocks stored in 4 x 4 arrays.

use crate::num;
use crate::{Error, Mat3, Point, Result, ScalarC2};
use nalgebra::Matrix4;

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub const MAT4_ZERO: Mat4 = [[0.0; 4]; 4];

#[derive(Debug, Clone)]
pub enum ConcaveFn {
    Constant { c: f64, dim: usize },
    /// c + <lin, z> - <z, Q z> with Q positive semidefinite.
    QuadCap { c: f64, lin: Vec4, q: Mat4, dim: usize },
    /// c - (|x| / s)^p, p >= 1; no t dependence.
    PowerCap { c: f64, s: f64, p: f64, dim: usize },
    /// Pointwise minimum of concave caps; derivatives use the active branch.
    MinOf { parts: Vec<ConcaveFn> },
}

fn joint(t: f64, x: &Point, n: usize) -> Vec4 {
    let mut z = [t, 0.0, 0.0, 0.0];
    z[1..=n].copy_from_slice(&x[..n]);
    z
}

fn mat4_vec(m: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = (0..4).map(|j| m[i][j] * v[j]).sum();
    }
    out
}

impl ConcaveFn {
    pub fn constant(c: f64, dim: usize) -> Result<Self> {
        if c < 0.0 {
            return Err(Error::NotNonnegative(format!("constant cap {c}")));
        }
        Ok(ConcaveFn::Constant { c, dim })
    }

    /// Quadratic cap; rejects Q with a negative eigenvalue beyond roundoff.
    pub fn quad_cap(c: f64, lin: Vec4, q: Mat4, dim: usize) -> Result<Self> {
        let m = Matrix4::from_fn(|i, j| q[i][j]);
        let sym = (m + m.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -1e-10 {
            return Err(Error::NotConcave(format!(
                "quadratic cap matrix has eigenvalue {min_eig}"
            )));
        }
        let mut qs = MAT4_ZERO;
        for i in 0..4 {
            for j in 0..4 {
                qs[i][j] = sym[(i, j)];
            }
        }
        Ok(ConcaveFn::QuadCap { c, lin, q: qs, dim })
    }

    /// Isotropic quadratic cap c - a t^2 - e t - b |x|^2.
    pub fn radial_quad_cap(c: f64, a: f64, e: f64, b: f64, dim: usize) -> Result<Self> {
        let mut q = MAT4_ZERO;
        q[0][0] = a;
        for d in 1..=dim {
            q[d][d] = b;
        }
        Self::quad_cap(c, [-e, 0.0, 0.0, 0.0], q, dim)
    }

    pub fn power_cap(c: f64, s: f64, p: f64, dim: usize) -> Result<Self> {
        if p < 1.0 {
            return Err(Error::NotConcave(format!("power cap exponent {p} < 1")));
        }
        if s <= 0.0 {
            return Err(Error::NotPositive(format!("power cap scale {s}")));
        }
        Ok(ConcaveFn::PowerCap { c, s, p, dim })
    }

    pub fn min_of(parts: Vec<ConcaveFn>) -> Result<Self> {
        let dim = parts
            .first()
            .ok_or_else(|| Error::TooFewPoints("min of zero caps".into()))?
            .dim();
        if parts.iter().any(|p| p.dim() != dim) {
            return Err(Error::GridMismatch("min of caps with mixed dimensions".into()));
        }
        Ok(ConcaveFn::MinOf { parts })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConcaveFn::Constant { dim, .. }
            | ConcaveFn::QuadCap { dim, .. }
            | ConcaveFn::PowerCap { dim, .. } => *dim,
            ConcaveFn::MinOf { parts } => parts[0].dim(),
        }
    }

    fn active<'a>(&'a self, t: f64, x: &Point) -> &'a ConcaveFn {
        match self {
            ConcaveFn::MinOf { parts } => parts
                .iter()
                .map(|p| (p, p.value(t, x)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0,
            other => other,
        }
    }

    pub fn value(&self, t: f64, x: &Point) -> f64 {
        match self {
            ConcaveFn::Constant { c, .. } => *c,
            ConcaveFn::QuadCap { c, lin, q, dim } => {
                let z = joint(t, x, *dim);
                let qz = mat4_vec(q, &z);
                let mut v = *c;
                for i in 0..4 {
                    v += lin[i] * z[i] - z[i] * qz[i];
                }
                v
            }
            ConcaveFn::PowerCap { c, s, p, .. } => c - (num::norm(x) / s).powf(*p),
            ConcaveFn::MinOf { parts } => {
                parts.iter().map(|q| q.value(t, x)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// d Phi / dt.
    pub fn dt(&self, t: f64, x: &Point) -> f64 {
        match self.active(t, x) {
            ConcaveFn::Constant { .. } | ConcaveFn::PowerCap { .. } => 0.0,
            ConcaveFn::QuadCap { lin, q, dim, .. } => {
                let z = joint(t, x, *dim);
                lin[0] - 2.0 * mat4_vec(q, &z)[0]
            }
            ConcaveFn::MinOf { .. } => unreachable!("active() unwraps MinOf"),
        }
    }

    /// Gradient in x only.
    pub fn grad_x(&self, t: f64, x: &Point) -> Point {
        match self.active(t, x) {
            ConcaveFn::Constant { .. } => num::ZERO3,
            ConcaveFn::QuadCap { lin, q, dim, .. } => {
                let z = joint(t, x, *dim);
                let qz = mat4_vec(q, &z);
                let mut g = num::ZERO3;
                for d in 0..*dim {
                    g[d] = lin[d + 1] - 2.0 * qz[d + 1];
                }
                g
            }
            ConcaveFn::PowerCap { s, p, .. } => {
                let r = num::norm(x);
                if r == 0.0 {
                    return num::ZERO3;
                }
                num::scale(x, -(p / (s * s)) * (r / s).powf(p - 2.0))
            }
            ConcaveFn::MinOf { .. } => unreachable!(),
        }
    }

    /// Hessian in x only.
    pub fn hess_x(&self, t: f64, x: &Point) -> Mat3 {
        match self.active(t, x) {
            ConcaveFn::Constant { .. } => num::MAT3_ZERO,
            ConcaveFn::QuadCap { q, dim, .. } => {
                let mut h = num::MAT3_ZERO;
                for i in 0..*dim {
                    for j in 0..*dim {
                        h[i][j] = -2.0 * q[i + 1][j + 1];
                    }
                }
                h
            }
            ConcaveFn::PowerCap { s, p, dim, .. } => {
                // grad^2 of r^p: p r^{p-2} [(p-1) u u^T + (I - u u^T)].
                let r = num::norm(x);
                let mut h = num::MAT3_ZERO;
                if r == 0.0 {
                    if *p == 2.0 {
                        for d in 0..*dim {
                            h[d][d] = -2.0 / (s * s);
                        }
                    }
                    return h;
                }
                let u = num::scale(x, 1.0 / r);
                let f = (p / (s * s)) * (r / s).powf(p - 2.0);
                for i in 0..*dim {
                    for j in 0..*dim {
                        let uu = u[i] * u[j];
                        let id = if i == j { 1.0 } else { 0.0 };
                        h[i][j] = -f * ((p - 1.0) * uu + (id - uu));
                    }
                }
                h
            }
            ConcaveFn::MinOf { .. } => unreachable!(),
        }
    }

    /// Full joint Hessian in (t, x).
    pub fn hess_joint(&self, t: f64, x: &Point) -> Mat4 {
        match self.active(t, x) {
            ConcaveFn::Constant { .. } => MAT4_ZERO,
            ConcaveFn::QuadCap { q, .. } => {
                let mut h = MAT4_ZERO;
                for i in 0..4 {
                    for j in 0..4 {
                        h[i][j] = -2.0 * q[i][j];
                    }
                }
                h
            }
            pc @ ConcaveFn::PowerCap { dim, .. } => {
                let hx = pc.hess_x(t, x);
                let mut h = MAT4_ZERO;
                for i in 0..*dim {
                    for j in 0..*dim {
                        h[i + 1][j + 1] = hx[i][j];
                    }
                }
                h
            }
            ConcaveFn::MinOf { .. } => unreachable!(),
        }
    }

    /// True when every t-section is an even function of x: no linear x part
    /// and no t-x coupling. Exact for caps, sampled for minima.
    pub fn is_even_in_x(&self) -> bool {
        match self {
            ConcaveFn::Constant { .. } | ConcaveFn::PowerCap { .. } => true,
            ConcaveFn::QuadCap { lin, q, dim, .. } => {
                (1..=*dim).all(|d| lin[d] == 0.0 && q[0][d] == 0.0 && q[d][0] == 0.0)
            }
            ConcaveFn::MinOf { parts } => parts.iter().all(|p| p.is_even_in_x()),
        }
    }

    /// The x-only slice at fixed t, usable as a C2 scalar field.
    pub fn frozen(&self, t: f64) -> FrozenCap<'_> {
        FrozenCap { f: self, t }
    }
}

/// A concave cap at fixed t, viewed as a function of x alone.
#[derive(Clone, Copy)]
pub struct FrozenCap<'a> {
    f: &'a ConcaveFn,
    t: f64,
}

impl ScalarC2 for FrozenCap<'_> {
    fn value(&self, x: &Point) -> f64 {
        self.f.value(self.t, x)
    }
    fn grad(&self, x: &Point) -> Point {
        self.f.grad_x(self.t, x)
    }
    fn hess(&self, x: &Point) -> Mat3 {
        self.f.hess_x(self.t, x)
    }
}
