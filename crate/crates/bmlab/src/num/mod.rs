//! Small numerical kernels: vector arithmetic on `[f64; 3]`, composite
//! Gauss quadrature, cumulative antiderivatives, finite-difference stencils
//! and the Halton sequence.

pub mod gauss;

use crate::{Mat3, Point};

pub const ZERO3: Point = [0.0, 0.0, 0.0];

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &Point, c: f64) -> Point {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn neg(a: &Point) -> Point {
    [-a[0], -a[1], -a[2]]
}

/// Unit vector along `a`; `a` must be nonzero.
pub fn unit(a: &Point) -> Point {
    let n = norm(a);
    debug_assert!(n > 0.0);
    scale(a, 1.0 / n)
}

pub fn mat_vec(m: &Mat3, v: &Point) -> Point {
    [
        dot(&m[0], v),
        dot(&m[1], v),
        dot(&m[2], v),
    ]
}

/// <v, M v>.
pub fn quad_form(m: &Mat3, v: &Point) -> f64 {
    dot(v, &mat_vec(m, v))
}

pub fn scale_mat(m: &Mat3, c: f64) -> Mat3 {
    let mut out = *m;
    for row in &mut out {
        for e in row.iter_mut() {
            *e *= c;
        }
    }
    out
}

/// Squared Frobenius norm of the leading n x n block.
pub fn frob2(m: &Mat3, n: usize) -> f64 {
    let mut s = 0.0;
    for row in m.iter().take(n) {
        for &e in row.iter().take(n) {
            s += e * e;
        }
    }
    s
}

pub const MAT3_ZERO: Mat3 = [[0.0; 3]; 3];

/// Composite Gauss-Legendre integral of `f` over [a, b] with `cells`
/// equal subintervals and `order` nodes per cell.
pub fn integrate_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize, order: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = gauss::gauss_legendre(order);
    let h = (b - a) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let lo = a + c as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for &(x, w) in rule {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

/// Cumulative antiderivative A(x) = int_a^x f, queried at arbitrary points.
/// Prefix sums are stored at cell boundaries; the partial cell is integrated
/// on demand with the same Gauss rule, so queries cost one cell's nodes.
pub struct Cumulative<F: Fn(f64) -> f64> {
    f: F,
    a: f64,
    h: f64,
    cells: usize,
    order: usize,
    prefix: Vec<f64>,
}

impl<F: Fn(f64) -> f64> Cumulative<F> {
    pub fn new(f: F, a: f64, b: f64, cells: usize, order: usize) -> Self {
        assert!(b > a && cells >= 1);
        let rule = gauss::gauss_legendre(order);
        let h = (b - a) / cells as f64;
        let mut prefix = Vec::with_capacity(cells + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for c in 0..cells {
            let lo = a + c as f64 * h;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            let mut s = 0.0;
            for &(x, w) in rule {
                s += w * f(mid + half * x);
            }
            acc += s * half;
            prefix.push(acc);
        }
        Cumulative { f, a, h, cells, order, prefix }
    }

    /// A(x) for x within [a, b] (clamped to the range).
    pub fn eval(&self, x: f64) -> f64 {
        let rel = ((x - self.a) / self.h).clamp(0.0, self.cells as f64);
        let cell = (rel.floor() as usize).min(self.cells - 1);
        let lo = self.a + cell as f64 * self.h;
        let x = x.clamp(self.a, self.a + self.cells as f64 * self.h);
        let rule = gauss::gauss_legendre(self.order);
        let mid = 0.5 * (lo + x);
        let half = 0.5 * (x - lo);
        let mut s = 0.0;
        for &(t, w) in rule {
            s += w * (self.f)(mid + half * t);
        }
        self.prefix[cell] + s * half
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}

/// Central second difference (f(t-h) - 2 f(t) + f(t+h)) / h^2.
pub fn second_difference(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t - h) - 2.0 * f(t) + f(t + h)) / (h * h)
}

/// Richardson-refined second derivative: combines steps h and h/2 and
/// reports the refined value together with the step-halving discrepancy.
pub fn second_derivative_refined(f: impl Fn(f64) -> f64, t: f64, h: f64) -> (f64, f64) {
    let d_h = second_difference(&f, t, h);
    let d_h2 = second_difference(&f, t, 0.5 * h);
    ((4.0 * d_h2 - d_h) / 3.0, (d_h2 - d_h).abs())
}

/// First derivative by a 4th-order central stencil.
pub fn first_derivative(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
}

/// Halton low-discrepancy sequence in [0,1]^dim, dim <= 4 (bases 2,3,5,7).
pub fn halton(index: usize, dim: usize) -> [f64; 4] {
    const BASES: [usize; 4] = [2, 3, 5, 7];
    let mut out = [0.0; 4];
    for (d, &b) in BASES.iter().enumerate().take(dim) {
        let mut i = index + 1;
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        out[d] = r;
    }
    out
}
