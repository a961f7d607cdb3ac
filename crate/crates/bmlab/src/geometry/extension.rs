//! Concave extension of a nonnegative concave function from an inner body
//! to an enclosing one, vanishing on the outer boundary:
//!
//!   ext(x) = sup { lambda * Phi(z) : lambda in [0,1], z in Theta,
//!                  x = lambda z + (1 - lambda) y for some y in Omega }.
//!
//! The supremum is taken over a tensor grid of z candidates (33 points per
//! axis) plus x itself when x lies in Theta; the largest feasible lambda for
//! a fixed z is found by bisection on the convex feasibility function
//! gauge_Omega(x - lambda z) - (1 - lambda).

use crate::geometry::body::SymmetricBody;
use crate::geometry::concave::ConcaveFn;
use crate::{Error, Point, Result};

const GRID_PER_AXIS: usize = 33;

/// Largest lambda in [0, 1] with (x - lambda z) / (1 - lambda) in Omega.
/// Assumes x in Omega so lambda = 0 is feasible.
fn lambda_max(omega: &SymmetricBody, x: &Point, z: &Point) -> f64 {
    let feas = |lam: f64| {
        let p = [
            x[0] - lam * z[0],
            x[1] - lam * z[1],
            x[2] - lam * z[2],
        ];
        omega.gauge(&p) - (1.0 - lam)
    };
    if feas(1.0) <= 1e-14 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feas(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Evaluate the concave extension at x in the closure of Omega.
///
/// Phi is read as a function of x alone (its t slot is frozen at zero) and
/// must be nonnegative on Theta; Theta must sit strictly inside Omega.
pub fn concave_extension(
    phi: &ConcaveFn,
    theta: &SymmetricBody,
    omega: &SymmetricBody,
    x: &Point,
) -> Result<f64> {
    let n = theta.dim();
    if omega.dim() != n {
        return Err(Error::GridMismatch(format!(
            "inner body dimension {n} vs outer {}",
            omega.dim()
        )));
    }
    // Strict nesting, sampled over grid directions.
    for d in theta.grid().dirs() {
        let ratio = theta.radial(d) / omega.radial(d);
        if ratio > 1.0 - 1e-9 {
            return Err(Error::BadNesting(format!(
                "inner body reaches fraction {ratio} of the outer body"
            )));
        }
    }
    if omega.gauge(x) > 1.0 + 1e-9 {
        return Err(Error::OutOfRange("query point outside the outer body".into()));
    }

    let bound = theta.circumradius();
    let mut candidates: Vec<Point> = Vec::new();
    if theta.gauge(x) <= 1.0 + 1e-12 {
        candidates.push(*x);
    }
    let steps = GRID_PER_AXIS;
    let axis: Vec<f64> = (0..steps)
        .map(|i| -bound + 2.0 * bound * i as f64 / (steps - 1) as f64)
        .collect();
    let mut push = |z: Point| {
        if theta.gauge(&z) <= 1.0 {
            candidates.push(z);
        }
    };
    match n {
        1 => {
            for &a in &axis {
                push([a, 0.0, 0.0]);
            }
        }
        2 => {
            for &a in &axis {
                for &b in &axis {
                    push([a, b, 0.0]);
                }
            }
        }
        _ => {
            for &a in &axis {
                for &b in &axis {
                    for &c in &axis {
                        push([a, b, c]);
                    }
                }
            }
        }
    }

    let mut best = 0.0f64;
    let mut best_z: Option<Point> = None;
    for z in &candidates {
        let v = phi.value(0.0, z);
        if v < -1e-12 {
            return Err(Error::NotNonnegative(format!(
                "cap takes value {v} inside the inner body"
            )));
        }
        if v <= 0.0 {
            continue;
        }
        let lam = lambda_max(omega, x, z);
        if lam * v > best {
            best = lam * v;
            best_z = Some(*z);
        }
    }

    // The grid seed can sit one cell away from the optimum (often on the
    // boundary of Theta); shrink a local pattern search around it.
    if let Some(mut zc) = best_z {
        let score = |z: &Point| -> f64 {
            if theta.gauge(z) > 1.0 {
                return 0.0;
            }
            let v = phi.value(0.0, z);
            if v <= 0.0 {
                return 0.0;
            }
            lambda_max(omega, x, z) * v
        };
        let mut span = 2.0 * bound / (steps - 1) as f64;
        let offsets = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let fixed = [0.0];
        let offs_b: &[f64] = if n >= 2 { &offsets } else { &fixed };
        let offs_c: &[f64] = if n >= 3 { &offsets } else { &fixed };
        while span > 1e-11 * bound.max(1.0) {
            let mut next = zc;
            for &oa in &offsets {
                for &ob in offs_b {
                    for &oc in offs_c {
                        let z = [zc[0] + oa * span, zc[1] + ob * span, zc[2] + oc * span];
                        let s = score(&z);
                        if s > best {
                            best = s;
                            next = z;
                        }
                    }
                }
            }
            zc = next;
            span *= 0.5;
        }
    }
    Ok(best)
}
