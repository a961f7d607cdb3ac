//! JSON instance descriptions for the command line.
//!
//! Every config is one JSON object; unknown keys are rejected. The builders
//! translate the serde types into library objects and never weaken library
//! validation, so a config that parses can still be refused by the
//! constructors (nonpositive beta, uneven cap, dimension mismatch).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use bmlab::geometry::{ConcaveFn, ConvexDomainFamily, DirectionGrid, RadiusFn};
use bmlab::inequalities::{BodySpec, QuadOpts, WeightSpec};
use bmlab::marginals::{uniform_grid, MarginalProblem};
use bmlab::Result;

fn lebesgue() -> WeightSpec {
    WeightSpec::Lebesgue
}

fn gaussian() -> WeightSpec {
    WeightSpec::Gaussian
}

/// Weight function Phi(t, x) of a marginal instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeCapSpec {
    One,
    Constant { value: f64 },
    /// c + t_lin t - t_quad t^2 - b |x|^2.
    RadialQuad {
        c: f64,
        #[serde(default)]
        t_lin: f64,
        #[serde(default)]
        t_quad: f64,
        b: f64,
    },
    /// c - (|x| / s)^p, constant in t.
    Power { c: f64, s: f64, p: f64 },
}

impl TimeCapSpec {
    pub fn build(&self, dim: usize) -> Result<ConcaveFn> {
        match *self {
            TimeCapSpec::One => ConcaveFn::constant(1.0, dim),
            TimeCapSpec::Constant { value } => ConcaveFn::constant(value, dim),
            TimeCapSpec::RadialQuad { c, t_lin, t_quad, b } => {
                ConcaveFn::radial_quad_cap(c, t_quad, -t_lin, b, dim)
            }
            TimeCapSpec::Power { c, s, p } => ConcaveFn::power_cap(c, s, p, dim),
        }
    }
}

/// Scalar radius profile of a radial family.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum RadiusSpec {
    Const { r: f64 },
    /// a + b t.
    Affine { a: f64, b: f64 },
    /// s (c0 + c1 t + c2 t^2)^e on the set where the base is positive.
    PowQuad { s: f64, e: f64, c0: f64, c1: f64, c2: f64 },
}

impl RadiusSpec {
    fn build(&self) -> RadiusFn {
        match *self {
            RadiusSpec::Const { r } => RadiusFn::Const { r },
            RadiusSpec::Affine { a, b } => RadiusFn::Affine { a, b },
            RadiusSpec::PowQuad { s, e, c0, c1, c2 } => RadiusFn::PowQuad { s, e, c0, c1, c2 },
        }
    }
}

/// Convex domain family t -> Omega_t.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// (1 - t) K + t L on [0, 1].
    Minkowski { k: BodySpec, l: BodySpec },
    /// Centered balls of radius r(t).
    Radial { r: RadiusSpec, t_range: [f64; 2] },
    /// Sections {x : cap(t, x) >= level}.
    SuperLevel { cap: TimeCapSpec, level: f64, t_range: [f64; 2] },
}

impl FamilySpec {
    pub fn build(&self, dim: usize) -> Result<ConvexDomainFamily> {
        let grid = Arc::new(DirectionGrid::standard(dim)?);
        match self {
            FamilySpec::Minkowski { k, l } => {
                let k = k.build(grid.clone())?;
                let l = l.build(grid)?;
                ConvexDomainFamily::minkowski(k, l)
            }
            FamilySpec::Radial { r, t_range } => {
                ConvexDomainFamily::radial(grid, r.build(), (t_range[0], t_range[1]))
            }
            FamilySpec::SuperLevel { cap, level, t_range } => ConvexDomainFamily::super_level(
                grid,
                cap.build(dim)?,
                *level,
                (t_range[0], t_range[1]),
            ),
        }
    }
}

/// Uniform evaluation grid lo, lo + h, ..., hi.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        uniform_grid(self.lo, self.hi, self.count)
    }
}

/// marginal-profile instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub dim: usize,
    pub family: FamilySpec,
    pub cap: TimeCapSpec,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "lebesgue")]
    pub weight: WeightSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub quad: QuadOpts,
}

impl ProfileConfig {
    pub fn problem(&self) -> Result<MarginalProblem> {
        build_problem(self.dim, &self.family, &self.cap, self.beta, self.gamma, &self.weight)
    }
}

/// second-variation instance: a marginal instance frozen at one t0.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondVariationConfig {
    pub dim: usize,
    pub family: FamilySpec,
    pub cap: TimeCapSpec,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "lebesgue")]
    pub weight: WeightSpec,
    pub t0: f64,
    #[serde(default)]
    pub quad: QuadOpts,
}

impl SecondVariationConfig {
    pub fn problem(&self) -> Result<MarginalProblem> {
        build_problem(self.dim, &self.family, &self.cap, self.beta, self.gamma, &self.weight)
    }
}

fn build_problem(
    dim: usize,
    family: &FamilySpec,
    cap: &TimeCapSpec,
    beta: f64,
    gamma: Option<f64>,
    weight: &WeightSpec,
) -> Result<MarginalProblem> {
    let family = family.build(dim)?;
    let cap = cap.build(dim)?;
    let mu = weight.measure(dim)?;
    let p = MarginalProblem::new(family, cap, beta, mu)?;
    match gamma {
        Some(g) => p.with_gamma(g),
        None => Ok(p),
    }
}

/// torsion instance: centered ball, weighted Laplacian, zero boundary data.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionConfig {
    pub dim: usize,
    pub r0: f64,
    #[serde(default = "lebesgue")]
    pub weight: WeightSpec,
}

/// b-profile instance: t -> log mu(e^t K) on a uniform grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BProfileConfig {
    pub dim: usize,
    pub body: BodySpec,
    #[serde(default = "gaussian")]
    pub weight: WeightSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub quad: QuadOpts,
}
