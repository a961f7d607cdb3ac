//! Origin-symmetric convex bodies described by support functions.
//!
//! A body is support values on a shared direction grid plus, when available,
//! an analytic family giving exact support and radial functions. Bodies built
//! from raw grid values fall back to interpolation (support) and to the outer
//! envelope formula rho(theta) = min_eta h(eta) / <theta, eta> (radial).

use crate::geometry::grid::DirectionGrid;
use crate::num;
use crate::{Error, Mat3, Point, Result};
use nalgebra::Matrix3;
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone)]
pub enum BodyFamily {
    Ball { r: f64 },
    /// Axis-aligned box with half-widths hw (first n entries).
    Cuboid { hw: Point },
    /// Support h(theta)^2 = <theta, M theta>, M symmetric positive definite.
    Ellipsoid { m: Mat3, minv: Mat3 },
    /// Convex hull of +-verts. In the plane, facets carries the outward edge
    /// normals with offsets, making radial and membership queries exact.
    Polytope { verts: Vec<Point>, facets: Vec<(Point, f64)> },
}

/// Outward facet normals and offsets of the symmetric polygon conv(+-verts).
fn polygon_facets(verts: &[Point]) -> Vec<(Point, f64)> {
    let mut pts: Vec<Point> = Vec::with_capacity(2 * verts.len());
    for v in verts {
        pts.push(*v);
        pts.push(num::neg(v));
    }
    pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    // Drop interior points: keep the convex hull by support maximality.
    let support = |theta: &Point| -> f64 {
        pts.iter().map(|v| num::dot(v, theta)).fold(f64::MIN, f64::max)
    };
    let hull: Vec<Point> = pts
        .iter()
        .cloned()
        .filter(|v| {
            let r = num::norm(v);
            r > 0.0 && {
                let theta = num::scale(v, 1.0 / r);
                // A vertex of the hull attains the support in some direction;
                // its own direction is enough for symmetric polygons spanning
                // the origin interior.
                (support(&theta) - r).abs() < 1e-12 * r.max(1.0)
            }
        })
        .collect();
    let m = hull.len();
    let mut facets = Vec::with_capacity(m);
    for i in 0..m {
        let a = hull[i];
        let b = hull[(i + 1) % m];
        let edge = num::sub(&b, &a);
        let mut normal = [edge[1], -edge[0], 0.0];
        let nn = num::norm(&normal);
        if nn < 1e-14 {
            continue;
        }
        normal = num::scale(&normal, 1.0 / nn);
        let off = num::dot(&normal, &a);
        if off < 0.0 {
            normal = num::neg(&normal);
        }
        facets.push((normal, off.abs()));
    }
    facets
}

#[derive(Debug, Clone)]
pub struct SymmetricBody {
    grid: Arc<DirectionGrid>,
    support: Vec<f64>,
    family: Option<BodyFamily>,
    radial_table: OnceLock<Arc<Vec<f64>>>,
}

fn family_support(fam: &BodyFamily, theta: &Point) -> f64 {
    match fam {
        BodyFamily::Ball { r } => *r,
        BodyFamily::Cuboid { hw } => {
            hw[0] * theta[0].abs() + hw[1] * theta[1].abs() + hw[2] * theta[2].abs()
        }
        BodyFamily::Ellipsoid { m, .. } => num::quad_form(m, theta).max(0.0).sqrt(),
        BodyFamily::Polytope { verts, .. } => verts
            .iter()
            .map(|v| num::dot(v, theta).abs())
            .fold(0.0, f64::max),
    }
}

impl SymmetricBody {
    fn with_family(grid: Arc<DirectionGrid>, family: BodyFamily) -> Self {
        let support = grid.dirs().iter().map(|d| family_support(&family, d)).collect();
        SymmetricBody {
            grid,
            support,
            family: Some(family),
            radial_table: OnceLock::new(),
        }
    }

    pub fn ball(grid: Arc<DirectionGrid>, r: f64) -> Result<Self> {
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::NotPositive(format!("ball radius {r}")));
        }
        Ok(Self::with_family(grid, BodyFamily::Ball { r }))
    }

    pub fn cuboid(grid: Arc<DirectionGrid>, hw: Point) -> Result<Self> {
        let n = grid.dim();
        for &h in hw.iter().take(n) {
            if h <= 0.0 || !h.is_finite() {
                return Err(Error::NotPositive(format!("box half-width {h}")));
            }
        }
        let mut hw = hw;
        hw.iter_mut().skip(n).for_each(|v| *v = 0.0);
        Ok(Self::with_family(grid, BodyFamily::Cuboid { hw }))
    }

    pub fn ellipsoid_axes(grid: Arc<DirectionGrid>, axes: Point) -> Result<Self> {
        let mut m = num::MAT3_ZERO;
        for d in 0..grid.dim() {
            if axes[d] <= 0.0 || !axes[d].is_finite() {
                return Err(Error::NotPositive(format!("ellipsoid semi-axis {}", axes[d])));
            }
            m[d][d] = axes[d] * axes[d];
        }
        Self::ellipsoid(grid, m)
    }

    /// Ellipsoid from the support matrix M (h^2 = <theta, M theta>).
    pub fn ellipsoid(grid: Arc<DirectionGrid>, mut m: Mat3) -> Result<Self> {
        let n = grid.dim();
        for i in 0..3 {
            for j in 0..3 {
                if i >= n || j >= n {
                    m[i][j] = if i == j && i >= n { 1.0 } else { 0.0 };
                }
            }
        }
        let nm = Matrix3::from_fn(|i, j| m[i][j]);
        let inv = nm
            .try_inverse()
            .ok_or_else(|| Error::NotPositive("ellipsoid matrix is singular".into()))?;
        let eig = nm.symmetric_eigenvalues();
        if eig.min() <= 0.0 {
            return Err(Error::NotPositive("ellipsoid matrix is not positive definite".into()));
        }
        let mut minv = num::MAT3_ZERO;
        for i in 0..3 {
            for j in 0..3 {
                minv[i][j] = inv[(i, j)];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                if i >= n || j >= n {
                    m[i][j] = 0.0;
                    minv[i][j] = 0.0;
                }
            }
        }
        Ok(Self::with_family(grid, BodyFamily::Ellipsoid { m, minv }))
    }

    /// Convex hull of the given vertices and their negations.
    pub fn polytope(grid: Arc<DirectionGrid>, verts: Vec<Point>) -> Result<Self> {
        if verts.is_empty() {
            return Err(Error::EmptyBody("polytope needs at least one vertex".into()));
        }
        // Origin must be interior: the vertices must span positively in every
        // grid direction, which the support positivity check below catches.
        let facets = if grid.dim() == 2 { polygon_facets(&verts) } else { Vec::new() };
        let body = Self::with_family(grid, BodyFamily::Polytope { verts, facets });
        for (i, &h) in body.support.iter().enumerate() {
            if h <= 1e-12 {
                return Err(Error::NotPositive(format!(
                    "polytope support vanishes in grid direction {i}; origin not interior"
                )));
            }
        }
        Ok(body)
    }

    /// Body from raw support values on the grid. Validates positivity,
    /// evenness, and (by sampling) discrete sublinearity.
    pub fn from_support(grid: Arc<DirectionGrid>, support: Vec<f64>) -> Result<Self> {
        if support.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} support values on a grid of {} directions",
                support.len(),
                grid.len()
            )));
        }
        let hmax = support.iter().cloned().fold(0.0, f64::max);
        for (i, &h) in support.iter().enumerate() {
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::NotPositive(format!("support value {h} at direction {i}")));
            }
            let j = grid.antipode(i);
            if (h - support[j]).abs() > 1e-10 * hmax.max(1.0) {
                return Err(Error::NotEven(format!(
                    "support differs at antipodes {i}, {j}: {h} vs {}",
                    support[j]
                )));
            }
        }
        let body = SymmetricBody {
            grid,
            support,
            family: None,
            radial_table: OnceLock::new(),
        };
        body.check_sublinearity_sampled()?;
        Ok(body)
    }

    /// Sampled discrete sublinearity: h(u) + h(v) >= |u + v| h((u+v)/|u+v|).
    fn check_sublinearity_sampled(&self) -> Result<()> {
        let g = &self.grid;
        let m = g.len();
        let pairs = 2048.min(m * m);
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..pairs {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let i = (state >> 33) as usize % m;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % m;
            let u = g.dirs()[i];
            let v = g.dirs()[j];
            let s = num::add(&u, &v);
            let ns = num::norm(&s);
            if ns < 1e-6 {
                continue;
            }
            let mid = num::scale(&s, 1.0 / ns);
            let interp = self.support(&mid);
            let tol = 1e-6 * (self.support[i] + self.support[j]).max(1.0)
                + 2.0 * g.mesh_half_angle().powi(2) * (self.support[i] + self.support[j]);
            if self.support[i] + self.support[j] + tol < ns * interp {
                return Err(Error::NotConcave(format!(
                    "support fails sublinearity between directions {i} and {j}"
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn family(&self) -> Option<&BodyFamily> {
        self.family.as_ref()
    }

    pub fn support_values(&self) -> &[f64] {
        &self.support
    }

    /// Support function at a unit direction; exact for analytic families.
    pub fn support(&self, theta: &Point) -> f64 {
        match &self.family {
            Some(fam) => family_support(fam, theta),
            None => self
                .grid
                .interp(theta)
                .iter()
                .map(|&(i, w)| w * self.support[i])
                .sum(),
        }
    }

    /// Radial function at a unit direction; exact for ball/box/ellipsoid,
    /// outer envelope over grid directions otherwise.
    pub fn radial(&self, theta: &Point) -> f64 {
        match &self.family {
            Some(BodyFamily::Ball { r }) => *r,
            Some(BodyFamily::Cuboid { hw }) => {
                let mut best = f64::INFINITY;
                for d in 0..self.dim() {
                    if theta[d].abs() > 1e-15 {
                        best = best.min(hw[d] / theta[d].abs());
                    }
                }
                best
            }
            Some(BodyFamily::Ellipsoid { minv, .. }) => {
                1.0 / num::quad_form(minv, theta).max(1e-300).sqrt()
            }
            Some(BodyFamily::Polytope { facets, .. }) if !facets.is_empty() => {
                let mut best = f64::INFINITY;
                for (normal, off) in facets {
                    let c = num::dot(theta, normal);
                    if c > 1e-15 {
                        best = best.min(off / c);
                    }
                }
                best
            }
            _ => self.radial_envelope(theta),
        }
    }

    fn radial_envelope(&self, theta: &Point) -> f64 {
        let mut best = f64::INFINITY;
        for (i, d) in self.grid.dirs().iter().enumerate() {
            let c = num::dot(theta, d);
            if c > 1e-9 {
                best = best.min(self.support[i] / c);
            }
        }
        best
    }

    /// Radial values at every grid direction, computed once and cached.
    pub fn radial_table(&self) -> Arc<Vec<f64>> {
        self.radial_table
            .get_or_init(|| {
                Arc::new(
                    self.grid
                        .dirs()
                        .iter()
                        .map(|d| self.radial(d))
                        .collect(),
                )
            })
            .clone()
    }

    /// Membership test, exact for analytic families.
    pub fn contains(&self, x: &Point) -> bool {
        match &self.family {
            Some(BodyFamily::Ball { r }) => num::norm(x) <= *r,
            Some(BodyFamily::Cuboid { hw }) => {
                (0..self.dim()).all(|d| x[d].abs() <= hw[d])
            }
            Some(BodyFamily::Ellipsoid { minv, .. }) => num::quad_form(minv, x) <= 1.0,
            Some(BodyFamily::Polytope { facets, .. }) if !facets.is_empty() => {
                facets.iter().all(|(normal, off)| num::dot(x, normal) <= *off)
            }
            _ => {
                let r = num::norm(x);
                if r == 0.0 {
                    return true;
                }
                let table = self.radial_table();
                let theta = num::scale(x, 1.0 / r);
                let rho: f64 = self
                    .grid
                    .interp(&theta)
                    .iter()
                    .map(|&(i, w)| w * table[i])
                    .sum();
                r <= rho
            }
        }
    }

    /// Gauge (Minkowski functional): |x| / rho(x/|x|); zero at the origin.
    pub fn gauge(&self, x: &Point) -> f64 {
        let r = num::norm(x);
        if r == 0.0 {
            return 0.0;
        }
        r / self.radial(&num::scale(x, 1.0 / r))
    }

    /// Upper bound on max_theta rho(theta), safe for bounding regions.
    pub fn circumradius(&self) -> f64 {
        match &self.family {
            Some(BodyFamily::Ball { r }) => *r,
            Some(BodyFamily::Cuboid { hw }) => num::norm(hw),
            Some(BodyFamily::Ellipsoid { m, .. }) => {
                let nm = Matrix3::from_fn(|i, j| m[i][j]);
                nm.symmetric_eigenvalues().max().sqrt()
            }
            Some(BodyFamily::Polytope { verts, .. }) => {
                verts.iter().map(num::norm).fold(0.0, f64::max)
            }
            None => {
                let hmax = self.support.iter().cloned().fold(0.0, f64::max);
                hmax / self.grid.mesh_half_angle().cos().max(0.5)
            }
        }
    }

    /// Angles (n = 2 only) where the radial function may lose smoothness.
    /// Some(empty) means smooth everywhere; None means unknown (grid body).
    pub fn angular_kinks(&self) -> Option<Vec<f64>> {
        if self.dim() != 2 {
            return None;
        }
        match &self.family {
            Some(BodyFamily::Ball { .. }) | Some(BodyFamily::Ellipsoid { .. }) => Some(Vec::new()),
            Some(BodyFamily::Cuboid { hw }) => {
                let a = hw[1].atan2(hw[0]);
                Some(vec![a, std::f64::consts::PI - a, std::f64::consts::PI + a, -a])
            }
            Some(BodyFamily::Polytope { verts, .. }) => {
                // Radial kinks sit at vertex directions; extra break points
                // from interior candidates only split panels harmlessly.
                let mut out = Vec::with_capacity(2 * verts.len());
                for v in verts {
                    out.push(v[1].atan2(v[0]));
                    out.push((-v[1]).atan2(-v[0]));
                }
                Some(out)
            }
            None => None,
        }
    }

    /// Dilate by c > 0.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::NotPositive(format!("scale factor {c}")));
        }
        let family = self.family.as_ref().map(|f| match f {
            BodyFamily::Ball { r } => BodyFamily::Ball { r: r * c },
            BodyFamily::Cuboid { hw } => BodyFamily::Cuboid { hw: num::scale(hw, c) },
            BodyFamily::Ellipsoid { m, minv } => {
                let mut m2 = *m;
                let mut mi2 = *minv;
                for i in 0..3 {
                    for j in 0..3 {
                        m2[i][j] *= c * c;
                        mi2[i][j] /= c * c;
                    }
                }
                BodyFamily::Ellipsoid { m: m2, minv: mi2 }
            }
            BodyFamily::Polytope { verts, facets } => BodyFamily::Polytope {
                verts: verts.iter().map(|v| num::scale(v, c)).collect(),
                facets: facets.iter().map(|(nrm, off)| (*nrm, off * c)).collect(),
            },
        });
        Ok(SymmetricBody {
            grid: self.grid.clone(),
            support: self.support.iter().map(|h| h * c).collect(),
            family,
            radial_table: OnceLock::new(),
        })
    }
}

/// Minkowski combination lambda K + (1 - lambda) L on a shared grid.
/// Support functions combine exactly; the analytic family is preserved when
/// the combination stays in the same family.
pub fn minkowski_combine(k: &SymmetricBody, l: &SymmetricBody, lambda: f64) -> Result<SymmetricBody> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("lambda {lambda} not in [0, 1]")));
    }
    if !k.grid.compatible(&l.grid) {
        return Err(Error::GridMismatch(
            "bodies live on different direction grids".into(),
        ));
    }
    let support: Vec<f64> = k
        .support
        .iter()
        .zip(&l.support)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    let family = match (&k.family, &l.family) {
        (Some(BodyFamily::Ball { r: a }), Some(BodyFamily::Ball { r: b })) => {
            Some(BodyFamily::Ball { r: lambda * a + (1.0 - lambda) * b })
        }
        (Some(BodyFamily::Cuboid { hw: a }), Some(BodyFamily::Cuboid { hw: b })) => {
            Some(BodyFamily::Cuboid {
                hw: num::add(&num::scale(a, lambda), &num::scale(b, 1.0 - lambda)),
            })
        }
        (
            Some(BodyFamily::Polytope { verts: a, .. }),
            Some(BodyFamily::Polytope { verts: b, .. }),
        ) if a.len() * b.len() <= 4096 => {
            // conv(A (+) B) = conv(A) (+) conv(B): pairwise sums suffice.
            // The symmetric closures of a and b require both sign choices.
            let mut verts = Vec::with_capacity(2 * a.len() * b.len());
            for va in a {
                for vb in b {
                    let sa = num::scale(va, lambda);
                    let sb = num::scale(vb, 1.0 - lambda);
                    verts.push(num::add(&sa, &sb));
                    verts.push(num::sub(&sa, &sb));
                }
            }
            let facets = if k.grid.dim() == 2 { polygon_facets(&verts) } else { Vec::new() };
            Some(BodyFamily::Polytope { verts, facets })
        }
        _ => None,
    };
    Ok(SymmetricBody {
        grid: k.grid.clone(),
        support,
        family,
        radial_table: OnceLock::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid2() -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::two(128).unwrap())
    }

    #[test]
    fn box_support_and_radial_are_exact() {
        let b = SymmetricBody::cuboid(grid2(), [1.0, 1.0, 0.0]).unwrap();
        let d = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0];
        assert_abs_diff_eq!(b.support(&d), 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(b.radial(&d), 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(b.radial(&[1.0, 0.0, 0.0]), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn minkowski_supports_add_exactly() {
        let g = grid2();
        let k = SymmetricBody::ball(g.clone(), 1.0).unwrap();
        let l = SymmetricBody::cuboid(g.clone(), [2.0, 1.0, 0.0]).unwrap();
        let m = minkowski_combine(&k, &l, 0.25).unwrap();
        for (i, d) in g.dirs().iter().enumerate() {
            let want = 0.25 * k.support(d) + 0.75 * l.support(d);
            assert_abs_diff_eq!(m.support_values()[i], want, epsilon = 1e-15);
        }
        assert!(minkowski_combine(&k, &l, 1.5).is_err());
    }

    #[test]
    fn ball_combination_stays_a_ball() {
        let g = grid2();
        let k = SymmetricBody::ball(g.clone(), 2.0).unwrap();
        let l = SymmetricBody::ball(g, 1.0).unwrap();
        let m = minkowski_combine(&k, &l, 0.5).unwrap();
        match m.family() {
            Some(BodyFamily::Ball { r }) => assert_abs_diff_eq!(*r, 1.5, epsilon = 1e-15),
            other => panic!("expected ball, got {other:?}"),
        }
    }

    #[test]
    fn radial_envelope_converges_to_true_radial() {
        // Ball support sampled onto the grid without the family tag.
        let g = grid2();
        let vals = vec![1.0; g.len()];
        let b = SymmetricBody::from_support(g, vals).unwrap();
        let d = [0.7f64.cos(), 0.7f64.sin(), 0.0];
        let r = b.radial(&d);
        assert!(r >= 1.0 && r < 1.002, "outer envelope within mesh error, got {r}");
    }

    #[test]
    fn from_support_rejects_uneven_data() {
        let g = grid2();
        let mut vals = vec![1.0; g.len()];
        vals[3] = 1.5;
        assert!(matches!(
            SymmetricBody::from_support(g, vals),
            Err(Error::NotEven(_))
        ));
    }

    #[test]
    fn gauge_and_membership_agree_for_ellipsoid() {
        let b = SymmetricBody::ellipsoid_axes(grid2(), [2.0, 0.5, 0.0]).unwrap();
        assert!(b.contains(&[1.9, 0.0, 0.0]));
        assert!(!b.contains(&[0.0, 0.6, 0.0]));
        assert_abs_diff_eq!(b.gauge(&[2.0, 0.0, 0.0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.circumradius(), 2.0, epsilon = 1e-12);
    }
}
