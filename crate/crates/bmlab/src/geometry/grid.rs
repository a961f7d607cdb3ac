//! Direction grids on the unit sphere S^{n-1}, n in {1, 2, 3}.
//!
//! Grid weights sum to the surface measure of S^{n-1} (2, 2*pi, 4*pi), so a
//! weighted sum over directions of a radial integral is a polar integral.
//! Every grid is antipodally symmetric: each direction's negation is also a
//! grid node, which is what lets even data live on the full grid unchanged.

use crate::num::{self, ZERO3};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    One,
    /// Equally spaced angles, spectral accuracy for smooth periodic data.
    Two { m: usize },
    /// Product of equally spaced azimuths with Gauss-Legendre cos-polar nodes.
    Three { naz: usize, cospolar: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct DirectionGrid {
    n: usize,
    dirs: Vec<Point>,
    weights: Vec<f64>,
    kind: Kind,
    /// Half the largest angular gap; used to inflate circumradius bounds.
    mesh_half_angle: f64,
}

impl DirectionGrid {
    /// Default resolution per dimension: {-1,+1}, 512 angles, 64 x 32 product.
    pub fn standard(n: usize) -> Result<Self> {
        match n {
            1 => Self::one(),
            2 => Self::two(512),
            3 => Self::three(64, 32),
            _ => Err(Error::OutOfRange(format!("dimension {n} not in 1..=3"))),
        }
    }

    fn one() -> Result<Self> {
        Ok(DirectionGrid {
            n: 1,
            dirs: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
            weights: vec![1.0, 1.0],
            kind: Kind::One,
            mesh_half_angle: 0.0,
        })
    }

    pub fn two(m: usize) -> Result<Self> {
        if m < 8 || m % 2 != 0 {
            return Err(Error::TooFewPoints(format!(
                "planar grid needs an even angle count >= 8, got {m}"
            )));
        }
        let step = std::f64::consts::TAU / m as f64;
        let dirs = (0..m)
            .map(|j| {
                let a = j as f64 * step;
                [a.cos(), a.sin(), 0.0]
            })
            .collect();
        Ok(DirectionGrid {
            n: 2,
            dirs,
            weights: vec![step; m],
            kind: Kind::Two { m },
            mesh_half_angle: 0.5 * step,
        })
    }

    pub fn three(naz: usize, npolar: usize) -> Result<Self> {
        if naz < 8 || naz % 2 != 0 || npolar < 4 {
            return Err(Error::TooFewPoints(format!(
                "spatial grid needs even azimuth count >= 8 and >= 4 polar nodes, got {naz} x {npolar}"
            )));
        }
        let az_step = std::f64::consts::TAU / naz as f64;
        let rule = num::gauss::gauss_legendre(npolar);
        let cospolar: Vec<f64> = rule.iter().map(|&(c, _)| c).collect();
        let mut dirs = Vec::with_capacity(naz * npolar);
        let mut weights = Vec::with_capacity(naz * npolar);
        for (ip, &(c, wp)) in rule.iter().enumerate() {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for ia in 0..naz {
                let a = ia as f64 * az_step;
                dirs.push([s * a.cos(), s * a.sin(), c]);
                weights.push(wp * az_step);
                debug_assert_eq!(dirs.len() - 1, ip * naz + ia);
            }
        }
        // Largest gap: azimuthal near the equator or polar near the caps.
        let polar_gap = (cospolar[0].acos() - cospolar[1].acos())
            .abs()
            .max(std::f64::consts::PI - cospolar[0].acos());
        Ok(DirectionGrid {
            n: 3,
            dirs,
            weights,
            kind: Kind::Three { naz, cospolar },
            mesh_half_angle: 0.5 * az_step.max(2.0 * polar_gap),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn dirs(&self) -> &[Point] {
        &self.dirs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mesh_half_angle(&self) -> f64 {
        self.mesh_half_angle
    }

    /// Index of -dirs[i]; exact by construction.
    pub fn antipode(&self, i: usize) -> usize {
        match &self.kind {
            Kind::One => 1 - i,
            Kind::Two { m } => (i + m / 2) % m,
            Kind::Three { naz, cospolar } => {
                let ip = i / naz;
                let ia = i % naz;
                (cospolar.len() - 1 - ip) * naz + (ia + naz / 2) % naz
            }
        }
    }

    /// Structural compatibility; bodies on compatible grids can be combined.
    pub fn compatible(&self, other: &DirectionGrid) -> bool {
        self.n == other.n && self.kind == other.kind
    }

    /// Interpolation stencil for a unit direction: up to four (index, weight)
    /// pairs with weights summing to one. Piecewise linear in angle (n = 2),
    /// bilinear in azimuth x cos-polar (n = 3, clamped at the polar caps).
    pub fn interp(&self, theta: &Point) -> Vec<(usize, f64)> {
        match &self.kind {
            Kind::One => {
                if theta[0] >= 0.0 {
                    vec![(0, 1.0)]
                } else {
                    vec![(1, 1.0)]
                }
            }
            Kind::Two { m } => {
                let ang = theta[1].atan2(theta[0]).rem_euclid(std::f64::consts::TAU);
                let step = std::f64::consts::TAU / *m as f64;
                let pos = ang / step;
                let i0 = (pos.floor() as usize) % m;
                let frac = pos - pos.floor();
                vec![(i0, 1.0 - frac), ((i0 + 1) % m, frac)]
            }
            Kind::Three { naz, cospolar } => {
                let ang = theta[1].atan2(theta[0]).rem_euclid(std::f64::consts::TAU);
                let step = std::f64::consts::TAU / *naz as f64;
                let pos = ang / step;
                let a0 = (pos.floor() as usize) % naz;
                let af = pos - pos.floor();
                let c = theta[2].clamp(-1.0, 1.0);
                let npol = cospolar.len();
                let (p0, pf) = if c <= cospolar[0] {
                    (0, 0.0)
                } else if c >= cospolar[npol - 1] {
                    (npol - 2, 1.0)
                } else {
                    let j = cospolar.partition_point(|&v| v <= c).min(npol - 1);
                    let lo = j - 1;
                    (lo, (c - cospolar[lo]) / (cospolar[j] - cospolar[lo]))
                };
                vec![
                    (p0 * naz + a0, (1.0 - af) * (1.0 - pf)),
                    (p0 * naz + (a0 + 1) % naz, af * (1.0 - pf)),
                    ((p0 + 1) * naz + a0, (1.0 - af) * pf),
                    ((p0 + 1) * naz + (a0 + 1) % naz, af * pf),
                ]
            }
        }
    }

    /// Validates that a direction lives on S^{n-1} for this grid's n.
    pub fn check_direction(&self, theta: &Point) -> Result<()> {
        let r = num::norm(theta);
        if (r - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!("direction has norm {r}, want 1")));
        }
        for (d, &c) in theta.iter().enumerate().skip(self.n) {
            if c != 0.0 {
                return Err(Error::OutOfRange(format!(
                    "direction has nonzero coordinate {c} at axis {d} beyond dimension {}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn zero_point(&self) -> Point {
        ZERO3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_sphere_surface() {
        let g1 = DirectionGrid::standard(1).unwrap();
        assert_abs_diff_eq!(g1.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-12);
        let g2 = DirectionGrid::standard(2).unwrap();
        assert_abs_diff_eq!(
            g2.weights().iter().sum::<f64>(),
            std::f64::consts::TAU,
            epsilon = 1e-12
        );
        let g3 = DirectionGrid::standard(3).unwrap();
        assert_abs_diff_eq!(
            g3.weights().iter().sum::<f64>(),
            4.0 * std::f64::consts::PI,
            epsilon = 1e-10
        );
    }

    #[test]
    fn antipode_is_exact() {
        for n in 1..=3 {
            let g = DirectionGrid::standard(n).unwrap();
            for i in 0..g.len() {
                let j = g.antipode(i);
                let d = g.dirs()[i];
                let e = g.dirs()[j];
                for k in 0..3 {
                    assert_abs_diff_eq!(d[k], -e[k], epsilon = 1e-12);
                }
                assert_eq!(g.antipode(j), i);
            }
        }
    }

    #[test]
    fn interp_reproduces_linear_in_angle_data() {
        let g = DirectionGrid::two(64).unwrap();
        // h(theta) = 2 + cos(2*angle) sampled on the grid, queried off-grid.
        let vals: Vec<f64> = g
            .dirs()
            .iter()
            .map(|d| 2.0 + (2.0 * d[1].atan2(d[0])).cos())
            .collect();
        let q = [0.3f64.cos(), 0.3f64.sin(), 0.0];
        let est: f64 = g.interp(&q).iter().map(|&(i, w)| w * vals[i]).sum();
        assert_abs_diff_eq!(est, 2.0 + 0.6f64.cos(), epsilon = 1e-2);
    }

    #[test]
    fn interp_weights_sum_to_one_on_sphere() {
        let g = DirectionGrid::standard(3).unwrap();
        for q in [
            [0.0, 0.0, 1.0],
            [0.3, -0.4, (1.0f64 - 0.25).sqrt()],
            [-1.0, 0.0, 0.0],
        ] {
            let s: f64 = g.interp(&q).iter().map(|&(_, w)| w).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_odd_or_tiny_grids() {
        assert!(DirectionGrid::two(7).is_err());
        assert!(DirectionGrid::two(6).is_err());
        assert!(DirectionGrid::three(8, 2).is_err());
    }
}
