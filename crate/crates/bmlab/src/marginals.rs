//! Marginal profiles and their concavity verdicts.
//!
//! The central object is phi(t) = (int_{Omega_t} Phi(t,x)^beta dmu)^gamma for
//! a convex domain family Omega_t, a concave cap Phi and gamma = 1/(beta+n).
//! Verdicts come from second central differences on a uniform t grid, cross
//! checked against the half-step stencil, with tolerances propagated from the
//! quadrature error of every profile point.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{ConcaveFn, ConvexDomainFamily, DirectionGrid, SymmetricBody};
use crate::integrate::{self, IntegralEstimate, QuadratureSpec};
use crate::measures::WeightedMeasure;
use crate::num;
use crate::{Error, Mat3, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProfileVerdict {
    #[serde(rename = "concave")]
    Concave,
    #[serde(rename = "violated")]
    Violated,
    #[serde(rename = "inconclusive-near-noise")]
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub value: f64,
    pub error: f64,
}

/// One interior stencil point: the grid-step second difference, the half-step
/// rerun, and the positive tolerance below which a value counts as noise.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StencilPoint {
    pub t: f64,
    pub d2: f64,
    pub d2_half: f64,
    pub tol_pos: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub label: String,
    pub support: [f64; 2],
    pub points: Vec<ProfilePoint>,
    pub stencil: Vec<StencilPoint>,
    pub min_d2: f64,
    pub argmin_t: f64,
    pub max_d2: f64,
    pub verdict: ProfileVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_margin: Option<f64>,
}

pub struct MarginalProblem {
    pub family: ConvexDomainFamily,
    pub cap: ConcaveFn,
    pub beta: f64,
    pub mu: WeightedMeasure,
    gamma: f64,
}

impl MarginalProblem {
    pub fn new(
        family: ConvexDomainFamily,
        cap: ConcaveFn,
        beta: f64,
        mu: WeightedMeasure,
    ) -> Result<Self> {
        let n = family.dim();
        if cap.dim() != n || mu.dim != n {
            return Err(Error::GridMismatch(format!(
                "family dimension {n}, cap {}, measure {}",
                cap.dim(),
                mu.dim
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::UnsupportedBeta(format!("beta {beta} must be positive")));
        }
        if !cap.is_even_in_x() {
            return Err(Error::NotEven("cap must be even in x on every section".into()));
        }
        let gamma = 1.0 / (beta + n as f64);
        Ok(MarginalProblem { family, cap, beta, mu, gamma })
    }

    /// Override the default exponent gamma = 1/(beta+n).
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        let n = self.family.dim() as f64;
        if !(gamma > 0.0 && gamma <= 1.0 / n) {
            return Err(Error::OutOfRange(format!("gamma {gamma} not in (0, 1/n]")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// F(t) = int_{Omega_t} Phi(t,.)^beta dmu; zero for an empty section.
    pub fn mass(&self, t: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
        match self.family.section(t)? {
            None => Ok(IntegralEstimate { value: 0.0, error: 0.0 }),
            Some(body) => {
                integrate::weighted_power_mass(&body, &self.cap, t, self.beta, &self.mu, spec)
            }
        }
    }

    /// phi(t) = F(t)^gamma with the quadrature error pushed through the power.
    pub fn phi(&self, t: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
        let m = self.mass(t, spec)?;
        if m.value <= 0.0 {
            return Ok(IntegralEstimate { value: 0.0, error: 0.0 });
        }
        let value = m.value.powf(self.gamma);
        let error = self.gamma * m.value.powf(self.gamma - 1.0) * m.error;
        Ok(IntegralEstimate { value, error })
    }

    /// Profile with second differences and a concavity verdict on a uniform
    /// grid. Support endpoints are located by bisection on section emptiness;
    /// empty sections contribute phi = 0 and are excluded from the stencil.
    pub fn concavity_report(
        &self,
        t_grid: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<ProfileReport> {
        let h = validate_uniform(t_grid)?;
        let (lo, hi) = self.family.t_range();
        for &t in t_grid {
            if t < lo || t > hi {
                return Err(Error::OutOfRange(format!(
                    "grid point {t} outside the family interval [{lo}, {hi}]"
                )));
            }
        }
        let samples = sample_profile(t_grid, h, spec, |t, s| self.phi(t, s))?;

        // Longest contiguous run of positive-mass grid points.
        let pos: Vec<bool> = samples.vals.iter().map(|&v| v > 0.0).collect();
        let (a, b) = longest_run(&pos).ok_or_else(|| {
            Error::TooFewPoints("no grid point has a nonempty section".into())
        })?;
        if b - a + 1 < 3 {
            return Err(Error::TooFewPoints(format!(
                "only {} nonempty grid points",
                b - a + 1
            )));
        }

        let empty_at = |t: f64| -> bool {
            !matches!(self.family.section(t), Ok(Some(_)))
        };
        let support_lo = if empty_at(lo) {
            bisect_boundary(&empty_at, lo, t_grid[a])
        } else {
            lo
        };
        let support_hi = if empty_at(hi) {
            bisect_boundary(&empty_at, hi, t_grid[b])
        } else {
            hi
        };

        let usable = |v: f64| v > 0.0;
        assemble_report(
            "phi",
            &samples,
            (a, b),
            [support_lo, support_hi],
            &usable,
            None,
            None,
        )
    }
}

/// Joint potentials V(t, x) for log-marginal profiles. Both builtin families
/// have closed-form joint derivatives.
#[derive(Clone, Debug)]
pub enum JointPotential {
    /// V = c0 + c1 t + c2 t^2 + <b0 + t b1, x> + <x, (A0 + t A1 + t^2 A2) x>/2.
    QuadInX {
        a0: Mat3,
        a1: Mat3,
        a2: Mat3,
        b0: Point,
        b1: Point,
        c: [f64; 3],
        dim: usize,
    },
    /// V(t, x) = V0(e^t x) with radial V0(y) = sum_j coef_j |y|^{pow_j}.
    ScaledRadial { terms: Vec<(f64, f64)>, dim: usize },
}

impl JointPotential {
    pub fn quad_in_x(
        a0: Mat3,
        a1: Mat3,
        a2: Mat3,
        b0: Point,
        b1: Point,
        c: [f64; 3],
        dim: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::OutOfRange(format!("dimension {dim} not in 1..=3")));
        }
        let clean = |mut m: Mat3| {
            for i in 0..3 {
                for j in 0..3 {
                    if i >= dim || j >= dim {
                        m[i][j] = 0.0;
                    } else if j > i {
                        let s = 0.5 * (m[i][j] + m[j][i]);
                        m[i][j] = s;
                        m[j][i] = s;
                    }
                }
            }
            m
        };
        let trim = |mut v: Point| {
            v.iter_mut().skip(dim).for_each(|c| *c = 0.0);
            v
        };
        Ok(JointPotential::QuadInX {
            a0: clean(a0),
            a1: clean(a1),
            a2: clean(a2),
            b0: trim(b0),
            b1: trim(b1),
            c,
            dim,
        })
    }

    /// Radial base profile sum_j coef_j |y|^{pow_j}, each coef >= 0, pow >= 1.
    pub fn scaled_radial(terms: Vec<(f64, f64)>, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::OutOfRange(format!("dimension {dim} not in 1..=3")));
        }
        for &(c, p) in &terms {
            if c < 0.0 || !c.is_finite() || p < 1.0 || !p.is_finite() {
                return Err(Error::NotPositive(format!(
                    "radial term {c} |y|^{p} needs coef >= 0 and power >= 1"
                )));
            }
        }
        Ok(JointPotential::ScaledRadial { terms, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            JointPotential::QuadInX { dim, .. } => *dim,
            JointPotential::ScaledRadial { dim, .. } => *dim,
        }
    }

    pub fn is_even_in_x(&self) -> bool {
        match self {
            JointPotential::QuadInX { b0, b1, .. } => {
                b0.iter().chain(b1.iter()).all(|&c| c == 0.0)
            }
            JointPotential::ScaledRadial { .. } => true,
        }
    }

    pub fn value(&self, t: f64, x: &Point) -> f64 {
        match self {
            JointPotential::QuadInX { a0, a1, a2, b0, b1, c, .. } => {
                let a = mat_affine(a0, a1, a2, t);
                c[0] + c[1] * t
                    + c[2] * t * t
                    + num::dot(&num::add(b0, &num::scale(b1, t)), x)
                    + 0.5 * num::quad_form(&a, x)
            }
            JointPotential::ScaledRadial { terms, .. } => {
                let rho = t.exp() * num::norm(x);
                terms.iter().map(|&(c, p)| c * rho.powf(p)).sum()
            }
        }
    }

    pub fn grad_x(&self, t: f64, x: &Point) -> Point {
        match self {
            JointPotential::QuadInX { a0, a1, a2, b0, b1, .. } => {
                let a = mat_affine(a0, a1, a2, t);
                num::add(&num::add(b0, &num::scale(b1, t)), &num::mat_vec(&a, x))
            }
            JointPotential::ScaledRadial { terms, .. } => {
                let r = num::norm(x);
                if r < 1e-300 {
                    return num::ZERO3;
                }
                let rho = t.exp() * r;
                let g1: f64 = terms.iter().map(|&(c, p)| c * p * rho.powf(p - 1.0)).sum();
                num::scale(&num::scale(x, 1.0 / r), t.exp() * g1)
            }
        }
    }

    /// Joint Hessian over (t, x), returned as a dense (n+1) x (n+1) matrix.
    pub fn hess_joint(&self, t: f64, x: &Point) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        match self {
            JointPotential::QuadInX { a0, a1, a2, b1, c, .. } => {
                let a = mat_affine(a0, a1, a2, t);
                let da = mat_affine(a1, &num::scale_mat(a2, 2.0), &num::MAT3_ZERO, t);
                m[(0, 0)] = 2.0 * c[2] + num::quad_form(a2, x);
                let cross = num::add(b1, &num::mat_vec(&da, x));
                for i in 0..n {
                    m[(0, i + 1)] = cross[i];
                    m[(i + 1, 0)] = cross[i];
                    for j in 0..n {
                        m[(i + 1, j + 1)] = a[i][j];
                    }
                }
            }
            JointPotential::ScaledRadial { terms, .. } => {
                let r = num::norm(x);
                let et = t.exp();
                let rho = et * r;
                let g1: f64 = terms.iter().map(|&(c, p)| c * p * rho.powf(p - 1.0)).sum();
                let g2: f64 = terms
                    .iter()
                    .map(|&(c, p)| c * p * (p - 1.0) * rho.powf(p - 2.0))
                    .sum();
                m[(0, 0)] = (g2 * rho + g1) * rho;
                if r > 1e-300 {
                    let u = num::scale(x, 1.0 / r);
                    for i in 0..n {
                        let ci = (g2 * rho + g1) * et * u[i];
                        m[(0, i + 1)] = ci;
                        m[(i + 1, 0)] = ci;
                        for j in 0..n {
                            let proj = if i == j { 1.0 } else { 0.0 };
                            m[(i + 1, j + 1)] = et
                                * et
                                * (g2 * u[i] * u[j] + (g1 / rho) * (proj - u[i] * u[j]));
                        }
                    }
                }
            }
        }
        m
    }
}

fn mat_affine(a0: &Mat3, a1: &Mat3, a2: &Mat3, t: f64) -> Mat3 {
    let mut out = num::MAT3_ZERO;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a0[i][j] + t * a1[i][j] + t * t * a2[i][j];
        }
    }
    out
}

/// Profile of log alpha(t), alpha(t) = int_{R^n} e^{-V(t,x)} dmu, with the
/// pointwise generalized-convexity margin: the smallest eigenvalue over a
/// Halton cloud of Hess V - kappa [[<grad_x V, x>, grad_x V^T], [grad_x V, 0]].
pub fn log_marginal_alpha(
    v: &JointPotential,
    mu: &WeightedMeasure,
    t_grid: &[f64],
    kappa: f64,
    cloud_half_width: f64,
    spec: &QuadratureSpec,
) -> Result<ProfileReport> {
    if v.dim() != mu.dim {
        return Err(Error::GridMismatch(format!(
            "potential dimension {} vs measure dimension {}",
            v.dim(),
            mu.dim
        )));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::OutOfRange(format!("kappa {kappa} not in [0, 1]")));
    }
    if !v.is_even_in_x() {
        return Err(Error::NotEven("potential has a linear-in-x part".into()));
    }
    let h = validate_uniform(t_grid)?;
    let n = mu.dim;
    let grid = Arc::new(DirectionGrid::standard(n)?);
    let eval = |t: f64, s: &QuadratureSpec| -> Result<IntegralEstimate> {
        let f = |x: &Point| (-v.value(t, x)).exp();
        let weighted = |x: &Point| f(x) * mu.density(x);
        let radius = integrate::decay_radius(&weighted, n, 0.0)?;
        let ball = SymmetricBody::ball(grid.clone(), radius)?;
        let a = integrate::integrate_body(f, &ball, mu, s)?;
        if !(a.value > 0.0) {
            return Err(Error::NonFiniteIntegrand(format!(
                "log-marginal mass {} at t = {t}",
                a.value
            )));
        }
        Ok(IntegralEstimate { value: a.value.ln(), error: a.error / a.value })
    };
    let samples = sample_profile(t_grid, h, spec, eval)?;

    let margin = kappa_condition_margin(v, kappa, t_grid, cloud_half_width);
    let run = (0, t_grid.len() - 1);
    let support = [t_grid[0], t_grid[t_grid.len() - 1]];
    assemble_report(
        "log_alpha",
        &samples,
        run,
        support,
        &|v: f64| v.is_finite(),
        Some(kappa),
        Some(margin),
    )
}

fn kappa_condition_margin(
    v: &JointPotential,
    kappa: f64,
    t_grid: &[f64],
    half_width: f64,
) -> f64 {
    let n = v.dim();
    let (t_lo, t_hi) = (t_grid[0], t_grid[t_grid.len() - 1]);
    let mut min_eig = f64::INFINITY;
    for idx in 0..4096u32 {
        let p = num::halton(idx as usize, n + 1);
        let t = t_lo + (t_hi - t_lo) * p[0];
        let mut x = num::ZERO3;
        for d in 0..n {
            x[d] = -half_width + 2.0 * half_width * p[d + 1];
        }
        if num::norm(&x) < 1e-10 {
            continue;
        }
        let mut m = v.hess_joint(t, &x);
        let g = v.grad_x(t, &x);
        m[(0, 0)] -= kappa * num::dot(&g, &x);
        for i in 0..n {
            m[(0, i + 1)] -= kappa * g[i];
            m[(i + 1, 0)] -= kappa * g[i];
        }
        let eig = m.symmetric_eigenvalues();
        min_eig = min_eig.min(eig.min());
    }
    min_eig
}

/// Profile of t -> log mu(e^t K). When the weight has finite total mass the
/// profile is normalized so values are log-probabilities.
pub fn b_profile_check(
    k: &SymmetricBody,
    mu: &WeightedMeasure,
    t_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ProfileReport> {
    if k.dim() != mu.dim {
        return Err(Error::GridMismatch(format!(
            "body dimension {} vs measure dimension {}",
            k.dim(),
            mu.dim
        )));
    }
    let h = validate_uniform(t_grid)?;
    let n = mu.dim;
    let log_norm = {
        let dens = |x: &Point| mu.density(x);
        match integrate::decay_radius(&dens, n, 0.0) {
            Ok(radius) => {
                let grid = Arc::new(DirectionGrid::standard(n)?);
                let ball = SymmetricBody::ball(grid, radius)?;
                let total = integrate::measure_body(&ball, mu, spec)?;
                total.value.ln()
            }
            // Infinite-mass weight (e.g. flat): report unnormalized logs.
            Err(_) => 0.0,
        }
    };
    let eval = |t: f64, s: &QuadratureSpec| -> Result<IntegralEstimate> {
        let body = k.scaled(t.exp())?;
        let m = integrate::measure_body(&body, mu, s)?;
        if !(m.value > 0.0) {
            return Err(Error::NonFiniteIntegrand(format!(
                "mass {} of the scaled body at t = {t}",
                m.value
            )));
        }
        Ok(IntegralEstimate { value: m.value.ln() - log_norm, error: m.error / m.value })
    };
    let samples = sample_profile(t_grid, h, spec, eval)?;
    let run = (0, t_grid.len() - 1);
    let support = [t_grid[0], t_grid[t_grid.len() - 1]];
    assemble_report(
        "log_mass",
        &samples,
        run,
        support,
        &|v: f64| v.is_finite(),
        None,
        None,
    )
}

/// Uniformly spaced ascending grid; returns the spacing.
fn validate_uniform(ts: &[f64]) -> Result<f64> {
    if ts.len() < 3 {
        return Err(Error::TooFewPoints(format!("{} grid points", ts.len())));
    }
    let h = ts[1] - ts[0];
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::BadConfig("t grid must be strictly increasing".into()));
    }
    for w in ts.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::BadConfig("t grid must be uniformly spaced".into()));
        }
    }
    Ok(h)
}

pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + step * i as f64).collect()
}

struct SampledProfile {
    ts: Vec<f64>,
    h: f64,
    vals: Vec<f64>,
    errs: Vec<f64>,
    /// Values at ts[i] + h/2, one per consecutive pair.
    mids: Vec<f64>,
    mid_errs: Vec<f64>,
}

fn sample_profile<F>(
    ts: &[f64],
    h: f64,
    spec: &QuadratureSpec,
    eval: F,
) -> Result<SampledProfile>
where
    F: Fn(f64, &QuadratureSpec) -> Result<IntegralEstimate> + Sync,
{
    let m = ts.len();
    let all: Vec<(usize, f64)> = ts
        .iter()
        .copied()
        .chain(ts.iter().take(m - 1).map(|&t| t + 0.5 * h))
        .enumerate()
        .collect();
    let results: Vec<IntegralEstimate> = all
        .par_iter()
        .map(|&(i, t)| eval(t, &spec.with_stream(spec.stream + i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let (head, tail) = results.split_at(m);
    Ok(SampledProfile {
        ts: ts.to_vec(),
        h,
        vals: head.iter().map(|e| e.value).collect(),
        errs: head.iter().map(|e| e.error).collect(),
        mids: tail.iter().map(|e| e.value).collect(),
        mid_errs: tail.iter().map(|e| e.error).collect(),
    })
}

fn longest_run(mask: &[bool]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &on) in mask.iter().enumerate() {
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.map_or(true, |(a, b)| i - 1 - s > b - a) {
                    best = Some((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        let end = mask.len() - 1;
        if best.map_or(true, |(a, b)| end - s > b - a) {
            best = Some((s, end));
        }
    }
    best
}

/// Bisect the emptiness boundary between an empty and a nonempty parameter.
fn bisect_boundary(empty_at: &dyn Fn(f64) -> bool, mut empty: f64, mut full: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (empty + full);
        if empty_at(mid) {
            empty = mid;
        } else {
            full = mid;
        }
    }
    0.5 * (empty + full)
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    label: &str,
    s: &SampledProfile,
    run: (usize, usize),
    support: [f64; 2],
    usable: &dyn Fn(f64) -> bool,
    kappa: Option<f64>,
    kappa_margin: Option<f64>,
) -> Result<ProfileReport> {
    let (a, b) = run;
    let h = s.h;
    let hh = h * h;
    let qq = 0.25 * hh;
    let mut stencil = Vec::new();
    for i in (a + 1)..b {
        let five = [s.vals[i - 1], s.mids[i - 1], s.vals[i], s.mids[i], s.vals[i + 1]];
        if !five.iter().all(|&v| usable(v)) {
            continue;
        }
        let d2 = (s.vals[i - 1] - 2.0 * s.vals[i] + s.vals[i + 1]) / hh;
        let d2_half = (s.mids[i - 1] - 2.0 * s.vals[i] + s.mids[i]) / qq;
        let prop = (s.errs[i - 1] + 2.0 * s.errs[i] + s.errs[i + 1]) / hh;
        let prop_half = (s.mid_errs[i - 1] + 2.0 * s.errs[i] + s.mid_errs[i]) / qq;
        let tol_pos = 10.0 * prop.max(prop_half);
        stencil.push(StencilPoint { t: s.ts[i], d2, d2_half, tol_pos });
    }
    if stencil.is_empty() {
        return Err(Error::TooFewPoints(
            "no interior stencil point has nonempty neighbours".into(),
        ));
    }
    let mut min_d2 = f64::INFINITY;
    let mut argmin_t = stencil[0].t;
    let mut max_d2 = f64::NEG_INFINITY;
    let mut any_violation = false;
    let mut all_clean = true;
    for p in &stencil {
        if p.d2 < min_d2 {
            min_d2 = p.d2;
            argmin_t = p.t;
        }
        max_d2 = max_d2.max(p.d2);
        let over = p.d2 > p.tol_pos;
        let over_half = p.d2_half > p.tol_pos;
        if over && over_half {
            any_violation = true;
        }
        if over || over_half {
            all_clean = false;
        }
    }
    let verdict = if any_violation {
        ProfileVerdict::Violated
    } else if all_clean {
        ProfileVerdict::Concave
    } else {
        ProfileVerdict::Inconclusive
    };
    let points = (0..s.ts.len())
        .map(|i| ProfilePoint { t: s.ts[i], value: s.vals[i], error: s.errs[i] })
        .collect();
    Ok(ProfileReport {
        label: label.into(),
        support,
        points,
        stencil,
        min_d2,
        argmin_t,
        max_d2,
        verdict,
        kappa,
        kappa_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadiusFn;
    use crate::measures::RadialWeight;
    use approx::assert_abs_diff_eq;

    fn grid1() -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::standard(1).unwrap())
    }

    fn lebesgue(n: usize) -> WeightedMeasure {
        WeightedMeasure::new(RadialWeight::Lebesgue, n).unwrap()
    }

    fn disc_problem() -> MarginalProblem {
        // Unit disc viewed through 1-d sections Omega_t = [-sqrt(1-t^2), +],
        // cap Phi(t, x) = 2 - t^2 - x^2.
        let family = ConvexDomainFamily::super_level(
            grid1(),
            ConcaveFn::radial_quad_cap(1.0, 1.0, 0.0, 1.0, 1).unwrap(),
            0.0,
            (-1.0, 1.0),
        )
        .unwrap();
        let cap = ConcaveFn::radial_quad_cap(2.0, 1.0, 0.0, 1.0, 1).unwrap();
        MarginalProblem::new(family, cap, 1.0, lebesgue(1)).unwrap()
    }

    #[test]
    fn constant_profile_is_flat_and_concave() {
        let family = ConvexDomainFamily::radial(
            grid1(),
            RadiusFn::Const { r: 1.0 },
            (-1.0, 1.0),
        )
        .unwrap();
        let cap = ConcaveFn::constant(1.0, 1).unwrap();
        let p = MarginalProblem::new(family, cap, 1.0, lebesgue(1)).unwrap();
        let spec = QuadratureSpec::default();
        let phi0 = p.phi(0.3, &spec).unwrap();
        assert_abs_diff_eq!(phi0.value, 2f64.sqrt(), epsilon = 1e-12);
        let report = p
            .concavity_report(&uniform_grid(-0.5, 0.5, 21), &spec)
            .unwrap();
        assert_eq!(report.verdict, ProfileVerdict::Concave);
        assert!(report.max_d2.abs() < 1e-8);
        assert_abs_diff_eq!(report.support[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.support[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disc_profile_matches_closed_form() {
        let p = disc_problem();
        let spec = QuadratureSpec::default();
        // int_{-1}^{1} (2 - x^2) dx = 10/3, gamma = 1/2.
        let phi0 = p.phi(0.0, &spec).unwrap();
        assert_abs_diff_eq!(phi0.value, (10.0f64 / 3.0).sqrt(), epsilon = 1e-10);

        let report = p
            .concavity_report(&uniform_grid(-0.9, 0.9, 37), &spec)
            .unwrap();
        assert_eq!(report.verdict, ProfileVerdict::Concave);
        assert!(report.min_d2 < 0.0);
        let mid = report
            .stencil
            .iter()
            .min_by(|a, b| a.t.abs().total_cmp(&b.t.abs()))
            .unwrap();
        assert_abs_diff_eq!(mid.d2, -1.6431677, epsilon = 5e-3);
        // Support of the section family is the whole (-1, 1).
        assert_abs_diff_eq!(report.support[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(report.support[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn scaling_the_cap_scales_the_profile_exactly() {
        let p = disc_problem();
        let spec = QuadratureSpec::default();
        let base = p.phi(0.2, &spec).unwrap().value;
        let scaled_cap = ConcaveFn::radial_quad_cap(6.0, 3.0, 0.0, 3.0, 1).unwrap();
        let family = ConvexDomainFamily::super_level(
            grid1(),
            ConcaveFn::radial_quad_cap(1.0, 1.0, 0.0, 1.0, 1).unwrap(),
            0.0,
            (-1.0, 1.0),
        )
        .unwrap();
        let p3 = MarginalProblem::new(family, scaled_cap, 1.0, lebesgue(1)).unwrap();
        let tripled = p3.phi(0.2, &spec).unwrap().value;
        // beta gamma = 1/2: multiplying the cap by 3 scales phi by sqrt(3).
        assert_abs_diff_eq!(tripled, 3f64.sqrt() * base, epsilon = 1e-10);
    }

    #[test]
    fn minkowski_interval_path_under_gaussian_is_concave() {
        let k = SymmetricBody::ball(grid1(), 1.0).unwrap();
        let l = SymmetricBody::ball(grid1(), 2.0).unwrap();
        let family = ConvexDomainFamily::minkowski(k, l).unwrap();
        let cap = ConcaveFn::constant(1.0, 1).unwrap();
        let p = MarginalProblem::new(
            family,
            cap,
            1.0,
            WeightedMeasure::new(RadialWeight::Gaussian, 1).unwrap(),
        )
        .unwrap();
        let report = p
            .concavity_report(&uniform_grid(0.0, 1.0, 26), &QuadratureSpec::default())
            .unwrap();
        assert_eq!(report.verdict, ProfileVerdict::Concave);
    }

    #[test]
    fn narrow_support_reports_too_few_points() {
        let family = ConvexDomainFamily::radial(
            grid1(),
            RadiusFn::PowQuad { s: 1.0, e: 0.5, c0: 0.04, c1: 0.0, c2: -1.0 },
            (-1.0, 1.0),
        )
        .unwrap();
        let cap = ConcaveFn::constant(1.0, 1).unwrap();
        let p = MarginalProblem::new(family, cap, 1.0, lebesgue(1)).unwrap();
        let err = p.concavity_report(&uniform_grid(-0.9, 0.9, 5), &QuadratureSpec::default());
        assert!(matches!(err, Err(Error::TooFewPoints(_))));
    }

    #[test]
    fn b_profile_of_interval_under_gaussian() {
        let k = SymmetricBody::ball(grid1(), 1.0).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Gaussian, 1).unwrap();
        let report =
            b_profile_check(&k, &mu, &uniform_grid(-1.0, 1.0, 41), &QuadratureSpec::default())
                .unwrap();
        assert_eq!(report.verdict, ProfileVerdict::Concave);
        let at0 = report
            .points
            .iter()
            .min_by(|a, b| a.t.abs().total_cmp(&b.t.abs()))
            .unwrap();
        // Normalized gaussian mass of [-1, 1].
        assert_abs_diff_eq!(at0.value, 0.6826894921370859f64.ln(), epsilon = 1e-8);
    }

    #[test]
    fn log_marginal_quadratic_base_profile() {
        // V0 = |y|^2/2 against the gaussian weight in one dimension:
        // alpha(t) = sqrt(2 pi) (1 + e^{2t})^{-1/2}, so
        // (log alpha)'' (0) = -1/2.
        let v = JointPotential::scaled_radial(vec![(0.5, 2.0)], 1).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Gaussian, 1).unwrap();
        let report = log_marginal_alpha(
            &v,
            &mu,
            &uniform_grid(-0.5, 0.5, 21),
            1.0,
            3.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, ProfileVerdict::Concave);
        let at0 = report
            .stencil
            .iter()
            .min_by(|a, b| a.t.abs().total_cmp(&b.t.abs()))
            .unwrap();
        assert_abs_diff_eq!(at0.d2, -0.5, epsilon = 1e-3);
        // For this V the generalized-convexity matrix at kappa = 1 is PSD.
        assert!(report.kappa_margin.unwrap() >= -1e-9);
    }

    #[test]
    fn log_marginal_power_eight_base_is_concave() {
        let v = JointPotential::scaled_radial(vec![(1.0, 8.0)], 1).unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Gaussian, 1).unwrap();
        let report = log_marginal_alpha(
            &v,
            &mu,
            &uniform_grid(-0.4, 0.4, 17),
            0.5,
            2.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, ProfileVerdict::Concave);
    }

    #[test]
    fn non_even_potential_is_rejected() {
        let v = JointPotential::quad_in_x(
            num::MAT3_ZERO,
            num::MAT3_ZERO,
            num::MAT3_ZERO,
            [1.0, 0.0, 0.0],
            num::ZERO3,
            [0.0; 3],
            1,
        )
        .unwrap();
        let mu = WeightedMeasure::new(RadialWeight::Gaussian, 1).unwrap();
        let err = log_marginal_alpha(
            &v,
            &mu,
            &uniform_grid(-0.5, 0.5, 11),
            0.0,
            2.0,
            &QuadratureSpec::default(),
        );
        assert!(matches!(err, Err(Error::NotEven(_))));
    }
}
