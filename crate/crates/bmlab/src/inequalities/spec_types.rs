//! Serializable instance descriptors shared by the checkers: weight families,
//! bodies, caps, quadrature options, polynomial test functions, and even
//! convex potentials. Every descriptor round-trips through JSON and builds
//! the corresponding runtime object after validation.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{ConcaveFn, DirectionGrid, SymmetricBody};
use crate::integrate::{self, IntegralEstimate, QuadMode, QuadratureSpec};
use crate::measures::{RadialWeight, WeightedMeasure};
use crate::num;
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Lebesgue,
    Gaussian,
    Power { alpha: f64 },
    HeavyTail { a: f64, b: f64 },
}

impl WeightSpec {
    pub fn build(&self) -> Result<RadialWeight> {
        match *self {
            WeightSpec::Lebesgue => Ok(RadialWeight::Lebesgue),
            WeightSpec::Gaussian => Ok(RadialWeight::Gaussian),
            WeightSpec::Power { alpha } => RadialWeight::power(alpha),
            WeightSpec::HeavyTail { a, b } => RadialWeight::heavy_tail(a, b),
        }
    }

    pub fn measure(&self, dim: usize) -> Result<WeightedMeasure> {
        WeightedMeasure::new(self.build()?, dim)
    }

    pub fn is_lebesgue(&self) -> bool {
        matches!(self, WeightSpec::Lebesgue)
    }

    /// Random admissible weight over the four builtin families.
    pub fn random(rng: &mut ChaCha8Rng) -> WeightSpec {
        match rng.random_range(0..4u8) {
            0 => WeightSpec::Lebesgue,
            1 => WeightSpec::Gaussian,
            2 => WeightSpec::Power { alpha: rng.random_range(1.0..4.0) },
            _ => WeightSpec::HeavyTail {
                a: rng.random_range(1.0..2.0),
                b: rng.random_range(0.5..2.0),
            },
        }
    }

    /// Random weight with finite total mass, so probability normalization
    /// and decay-truncated integrals exist.
    pub fn random_decaying(rng: &mut ChaCha8Rng) -> WeightSpec {
        match rng.random_range(0..2u8) {
            0 => WeightSpec::Gaussian,
            _ => WeightSpec::Power { alpha: rng.random_range(1.5..4.0) },
        }
    }

    /// Random weight whose density is twice differentiable through the
    /// origin, for checks that integrate second derivatives of the weight.
    pub fn random_smooth(rng: &mut ChaCha8Rng) -> WeightSpec {
        match rng.random_range(0..4u8) {
            0 => WeightSpec::Lebesgue,
            1 => WeightSpec::Gaussian,
            2 => WeightSpec::Power { alpha: if rng.random_range(0..2u8) == 0 { 2.0 } else { 4.0 } },
            _ => WeightSpec::HeavyTail { a: 2.0, b: rng.random_range(0.5..2.0) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball { radius: f64 },
    Cuboid { half_widths: Vec<f64> },
    Ellipsoid { semi_axes: Vec<f64> },
}

impl BodySpec {
    pub fn build(&self, grid: Arc<DirectionGrid>) -> Result<SymmetricBody> {
        let n = grid.dim();
        match self {
            BodySpec::Ball { radius } => SymmetricBody::ball(grid, *radius),
            BodySpec::Cuboid { half_widths } => {
                SymmetricBody::cuboid(grid, to_point(half_widths, n)?)
            }
            BodySpec::Ellipsoid { semi_axes } => {
                SymmetricBody::ellipsoid_axes(grid, to_point(semi_axes, n)?)
            }
        }
    }

    /// Largest norm over the body, without building it.
    pub fn circumradius(&self) -> f64 {
        match self {
            BodySpec::Ball { radius } => *radius,
            BodySpec::Cuboid { half_widths } => {
                half_widths.iter().map(|h| h * h).sum::<f64>().sqrt()
            }
            BodySpec::Ellipsoid { semi_axes } => semi_axes.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn random(rng: &mut ChaCha8Rng, dim: usize) -> BodySpec {
        let coords = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim).map(|_| rng.random_range(0.5..1.8)).collect()
        };
        match rng.random_range(0..3u8) {
            0 => BodySpec::Ball { radius: rng.random_range(0.5..1.8) },
            1 => BodySpec::Cuboid { half_widths: coords(rng) },
            _ => BodySpec::Ellipsoid { semi_axes: coords(rng) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapSpec {
    One,
    Constant { value: f64 },
    /// c - b |x|^2.
    RadialQuad { c: f64, b: f64 },
    /// c - (|x| / s)^p.
    Power { c: f64, s: f64, p: f64 },
}

impl CapSpec {
    pub fn build(&self, dim: usize) -> Result<ConcaveFn> {
        match *self {
            CapSpec::One => ConcaveFn::constant(1.0, dim),
            CapSpec::Constant { value } => ConcaveFn::constant(value, dim),
            CapSpec::RadialQuad { c, b } => ConcaveFn::radial_quad_cap(c, 0.0, 0.0, b, dim),
            CapSpec::Power { c, s, p } => ConcaveFn::power_cap(c, s, p, dim),
        }
    }

    /// Value at radius r from the center; caps here are radial.
    pub fn value_at_radius(&self, r: f64) -> f64 {
        match *self {
            CapSpec::One => 1.0,
            CapSpec::Constant { value } => value,
            CapSpec::RadialQuad { c, b } => c - b * r * r,
            CapSpec::Power { c, s, p } => c - (r / s).powf(p),
        }
    }

    /// Random even concave cap kept at least 0.1 on the ball of radius
    /// `reach`, so integer and fractional powers stay regular.
    pub fn random_positive(rng: &mut ChaCha8Rng, reach: f64) -> CapSpec {
        match rng.random_range(0..3u8) {
            0 => CapSpec::Constant { value: rng.random_range(0.5..2.0) },
            1 => {
                let b = rng.random_range(0.1..1.0);
                CapSpec::RadialQuad { c: b * reach * reach + rng.random_range(0.1..1.0), b }
            }
            _ => {
                let s = rng.random_range(0.8..2.0);
                let p = rng.random_range(1.0..2.5);
                CapSpec::Power { c: (reach / s).powf(p) + rng.random_range(0.1..1.0), s, p }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadOpts {
    pub mode: QuadMode,
    pub radial_order: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { mode: QuadMode::Polar, radial_order: 64, mc_samples: 1 << 18, seed: 17 }
    }
}

impl QuadOpts {
    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            mode: self.mode,
            radial_order: self.radial_order,
            mc_samples: self.mc_samples,
            seed: self.seed,
            stream: 0,
        }
    }

    /// The opposite quadrature mode, used to confirm apparent violations.
    pub fn cross_spec(&self) -> QuadratureSpec {
        let mut spec = self.spec();
        spec.mode = match self.mode {
            QuadMode::Polar => QuadMode::Mc,
            QuadMode::Mc => QuadMode::Polar,
        };
        spec
    }
}

/// One directional term coef * <dir, x>^k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirTerm {
    pub coef: f64,
    pub dir: Vec<f64>,
}

/// Polynomial test function
/// constant + <linear, x> + sum c <u, x>^2 + sum c <u, x>^3 + radial4 |x|^4.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolyTestFn {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub squares: Vec<DirTerm>,
    pub cubes: Vec<DirTerm>,
    pub radial4: f64,
}

impl PolyTestFn {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !self.linear.is_empty() && self.linear.len() != dim {
            return Err(Error::GridMismatch(format!(
                "linear part has {} entries in dimension {dim}",
                self.linear.len()
            )));
        }
        for term in self.squares.iter().chain(self.cubes.iter()) {
            if term.dir.len() != dim {
                return Err(Error::GridMismatch(format!(
                    "directional term has {} entries in dimension {dim}",
                    term.dir.len()
                )));
            }
        }
        Ok(())
    }

    pub fn is_even(&self) -> bool {
        self.linear.iter().all(|&c| c == 0.0) && self.cubes.iter().all(|t| t.coef == 0.0)
    }

    pub fn value(&self, x: &Point) -> f64 {
        let mut v = self.constant;
        for (i, c) in self.linear.iter().enumerate() {
            v += c * x[i];
        }
        for t in &self.squares {
            v += t.coef * dot_vec(&t.dir, x).powi(2);
        }
        for t in &self.cubes {
            v += t.coef * dot_vec(&t.dir, x).powi(3);
        }
        let r2 = num::dot(x, x);
        v + self.radial4 * r2 * r2
    }

    pub fn grad(&self, x: &Point) -> Point {
        let mut g = num::ZERO3;
        for (i, c) in self.linear.iter().enumerate() {
            g[i] += c;
        }
        for t in &self.squares {
            let s = 2.0 * t.coef * dot_vec(&t.dir, x);
            add_scaled(&mut g, &t.dir, s);
        }
        for t in &self.cubes {
            let s = 3.0 * t.coef * dot_vec(&t.dir, x).powi(2);
            add_scaled(&mut g, &t.dir, s);
        }
        let s = 4.0 * self.radial4 * num::dot(x, x);
        for (gi, xi) in g.iter_mut().zip(x.iter()) {
            *gi += s * xi;
        }
        g
    }

    pub fn random_even(rng: &mut ChaCha8Rng, dim: usize) -> PolyTestFn {
        PolyTestFn {
            constant: rng.random_range(-1.0..1.0),
            linear: Vec::new(),
            squares: vec![DirTerm {
                coef: rng.random_range(-1.5..1.5),
                dir: random_unit(rng, dim),
            }],
            cubes: Vec::new(),
            radial4: rng.random_range(0.0..0.3),
        }
    }

    pub fn random_any(rng: &mut ChaCha8Rng, dim: usize) -> PolyTestFn {
        let mut f = PolyTestFn::random_even(rng, dim);
        f.linear = random_unit(rng, dim)
            .into_iter()
            .map(|c| c * rng.random_range(0.0..1.5))
            .collect();
        if rng.random_range(0..2u8) == 0 {
            f.cubes = vec![DirTerm {
                coef: rng.random_range(-0.8..0.8),
                dir: random_unit(rng, dim),
            }];
        }
        f
    }
}

/// One power term coef * |<dir, x>|^exponent with coef >= 0, exponent >= 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerDirTerm {
    pub coef: f64,
    pub dir: Vec<f64>,
    pub exponent: f64,
}

/// sum c <u, x>^2 + sum d |<v, x>|^p with every coefficient nonnegative and
/// every exponent in [1, 6]. Even and convex by construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvenConvexPotential {
    pub squares: Vec<DirTerm>,
    pub powers: Vec<PowerDirTerm>,
}

impl EvenConvexPotential {
    /// `min_exponent` is 1 for evaluation-only use and 2 when second
    /// derivatives of the potential are consumed.
    pub fn validate(&self, dim: usize, min_exponent: f64) -> Result<()> {
        for t in &self.squares {
            if t.coef < 0.0 || !t.coef.is_finite() {
                return Err(Error::NotNonnegative(format!("square coefficient {}", t.coef)));
            }
            if t.dir.len() != dim {
                return Err(Error::GridMismatch(format!(
                    "square direction has {} entries in dimension {dim}",
                    t.dir.len()
                )));
            }
        }
        for t in &self.powers {
            if t.coef < 0.0 || !t.coef.is_finite() {
                return Err(Error::NotNonnegative(format!("power coefficient {}", t.coef)));
            }
            if !(min_exponent..=6.0).contains(&t.exponent) {
                return Err(Error::OutOfRange(format!(
                    "power exponent {} not in [{min_exponent}, 6]",
                    t.exponent
                )));
            }
            if t.dir.len() != dim {
                return Err(Error::GridMismatch(format!(
                    "power direction has {} entries in dimension {dim}",
                    t.dir.len()
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &Point) -> f64 {
        let mut v = 0.0;
        for t in &self.squares {
            v += t.coef * dot_vec(&t.dir, x).powi(2);
        }
        for t in &self.powers {
            v += t.coef * dot_vec(&t.dir, x).abs().powf(t.exponent);
        }
        v
    }

    pub fn grad(&self, x: &Point) -> Point {
        let mut g = num::ZERO3;
        for t in &self.squares {
            add_scaled(&mut g, &t.dir, 2.0 * t.coef * dot_vec(&t.dir, x));
        }
        for t in &self.powers {
            let s = dot_vec(&t.dir, x);
            let m = t.coef * t.exponent * s.abs().powf(t.exponent - 1.0) * s.signum();
            add_scaled(&mut g, &t.dir, m);
        }
        g
    }

    /// Hessian as an n x n dense block; exponents below 2 are rejected by
    /// `validate` before this is called.
    pub fn hess(&self, x: &Point, dim: usize) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for t in &self.squares {
            rank_one(&mut m, &t.dir, 2.0 * t.coef, dim);
        }
        for t in &self.powers {
            let s = dot_vec(&t.dir, x).abs();
            let c = t.coef * t.exponent * (t.exponent - 1.0) * s.powf(t.exponent - 2.0);
            rank_one(&mut m, &t.dir, c, dim);
        }
        m
    }

    pub fn random(rng: &mut ChaCha8Rng, dim: usize, min_exponent: f64) -> EvenConvexPotential {
        let squares = (0..rng.random_range(1..3u8))
            .map(|_| DirTerm { coef: rng.random_range(0.0..1.0), dir: random_unit(rng, dim) })
            .collect();
        let powers = (0..rng.random_range(0..3u8))
            .map(|_| PowerDirTerm {
                coef: rng.random_range(0.0..1.0),
                dir: random_unit(rng, dim),
                exponent: rng.random_range(min_exponent..6.0),
            })
            .collect();
        EvenConvexPotential { squares, powers }
    }
}

fn rank_one(m: &mut nalgebra::DMatrix<f64>, dir: &[f64], c: f64, dim: usize) {
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] += c * dir[i] * dir[j];
        }
    }
}

pub(crate) fn dot_vec(a: &[f64], x: &Point) -> f64 {
    a.iter().zip(x.iter()).map(|(ai, xi)| ai * xi).sum()
}

fn add_scaled(g: &mut Point, dir: &[f64], s: f64) {
    for (gi, di) in g.iter_mut().zip(dir.iter()) {
        *gi += s * di;
    }
}

pub(crate) fn to_point(v: &[f64], n: usize) -> Result<Point> {
    if v.len() != n {
        return Err(Error::GridMismatch(format!(
            "{} coordinates supplied in dimension {n}",
            v.len()
        )));
    }
    let mut p = num::ZERO3;
    p[..n].copy_from_slice(v);
    Ok(p)
}

pub(crate) fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

pub(crate) fn standard_grid(n: usize) -> Result<Arc<DirectionGrid>> {
    Ok(Arc::new(DirectionGrid::standard(n)?))
}

/// Integral of f against dens * dmu over all of R^n, truncated at the radius
/// where the density (padded by a degree-6 polynomial envelope) has decayed
/// below working precision.
pub(crate) fn density_moment<F, D>(
    f: F,
    dens: D,
    mu: &WeightedMeasure,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate>
where
    F: Fn(&Point) -> f64 + Sync,
    D: Fn(&Point) -> f64 + Sync,
{
    let probe = |x: &Point| {
        let r2 = num::dot(x, x);
        dens(x) * mu.density(x) * (1.0 + r2).powi(3)
    };
    let radius = integrate::decay_radius(&probe, mu.dim, 0.0)?;
    let ball = SymmetricBody::ball(standard_grid(mu.dim)?, radius)?;
    integrate::integrate_body(|x| f(x) * dens(x), &ball, mu, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::instance_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn specs_round_trip_through_json() {
        let w = WeightSpec::HeavyTail { a: 2.0, b: 4.0 };
        let j = serde_json::to_value(w).unwrap();
        assert_eq!(serde_json::from_value::<WeightSpec>(j).unwrap(), w);

        let b = BodySpec::Cuboid { half_widths: vec![1.0, 0.5] };
        let j = serde_json::to_value(&b).unwrap();
        assert_eq!(serde_json::from_value::<BodySpec>(j).unwrap(), b);

        let c = CapSpec::Power { c: 2.0, s: 1.5, p: 1.3 };
        let j = serde_json::to_value(c).unwrap();
        assert_eq!(serde_json::from_value::<CapSpec>(j).unwrap(), c);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let j = serde_json::json!({"family": "exponential"});
        assert!(serde_json::from_value::<WeightSpec>(j).is_err());
        let j = serde_json::json!({"mode": "polar", "cells": 3});
        assert!(serde_json::from_value::<QuadOpts>(j).is_err());
    }

    #[test]
    fn poly_test_fn_gradient_matches_finite_differences() {
        let mut rng = instance_rng("spec_types_test", 5, 0);
        let f = PolyTestFn::random_any(&mut rng, 3);
        let x = [0.4, -0.7, 0.2];
        let g = f.grad(&x);
        for d in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert_abs_diff_eq!(g[d], fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn even_convex_potential_is_even_and_convex_on_samples() {
        let mut rng = instance_rng("spec_types_test", 9, 1);
        let v = EvenConvexPotential::random(&mut rng, 2, 2.0);
        v.validate(2, 2.0).unwrap();
        for i in 0..50 {
            let p = num::halton(i, 2);
            let x = [4.0 * p[0] - 2.0, 4.0 * p[1] - 2.0, 0.0];
            let neg = [-x[0], -x[1], 0.0];
            assert_abs_diff_eq!(v.value(&x), v.value(&neg), epsilon = 1e-12);
            let eig = v.hess(&x, 2).symmetric_eigenvalues();
            assert!(eig.min() >= -1e-12);
        }
    }

    #[test]
    fn density_moment_matches_gaussian_closed_form() {
        let mu = WeightSpec::Gaussian.measure(1).unwrap();
        let spec = QuadratureSpec::default();
        // int x^2 e^{-x^2/2} dx = sqrt(2 pi).
        let got = density_moment(|x| x[0] * x[0], |_| 1.0, &mu, &spec).unwrap();
        assert_abs_diff_eq!(got.value, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-10);
    }
}
