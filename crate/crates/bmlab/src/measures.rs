//! Rotationally invariant weighted measures dmu = exp(-w(|x|)) dx.
//!
//! Admissibility means w is nondecreasing and s -> w(e^s) is convex, i.e.
//! r^2 w'' + r w' >= 0; this is strictly weaker than log-concavity of the
//! density (the heavy-tail family is admissible but not log-concave).

use crate::num;
use crate::{Error, Mat3, Point, Result, ScalarC2};
use std::fmt;
use std::sync::Arc;

/// Radial weight profile w(r), with first and second derivatives.
#[derive(Clone)]
pub enum RadialWeight {
    Lebesgue,
    /// w(r) = r^2 / 2.
    Gaussian,
    /// w(r) = r^alpha / alpha, alpha >= 1.
    Power { alpha: f64 },
    /// w(r) = b ln(1 + r^a); admissible but not log-concave.
    HeavyTail { a: f64, b: f64 },
    /// Arbitrary profile for experiments; derivatives supplied by the caller.
    Custom {
        name: String,
        w: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        dw: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        ddw: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialWeight::Lebesgue => write!(f, "Lebesgue"),
            RadialWeight::Gaussian => write!(f, "Gaussian"),
            RadialWeight::Power { alpha } => write!(f, "Power(alpha={alpha})"),
            RadialWeight::HeavyTail { a, b } => write!(f, "HeavyTail(a={a}, b={b})"),
            RadialWeight::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl RadialWeight {
    pub fn power(alpha: f64) -> Result<Self> {
        if alpha < 1.0 || !alpha.is_finite() {
            return Err(Error::OutOfRange(format!("power exponent {alpha} < 1")));
        }
        Ok(RadialWeight::Power { alpha })
    }

    pub fn heavy_tail(a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::NotPositive(format!("heavy-tail parameters a={a}, b={b}")));
        }
        Ok(RadialWeight::HeavyTail { a, b })
    }

    pub fn w(&self, r: f64) -> f64 {
        match self {
            RadialWeight::Lebesgue => 0.0,
            RadialWeight::Gaussian => 0.5 * r * r,
            RadialWeight::Power { alpha } => r.powf(*alpha) / alpha,
            RadialWeight::HeavyTail { a, b } => b * (1.0 + r.powf(*a)).ln(),
            RadialWeight::Custom { w, .. } => w(r),
        }
    }

    pub fn dw(&self, r: f64) -> f64 {
        match self {
            RadialWeight::Lebesgue => 0.0,
            RadialWeight::Gaussian => r,
            RadialWeight::Power { alpha } => r.powf(alpha - 1.0),
            RadialWeight::HeavyTail { a, b } => {
                let ra = r.powf(*a);
                b * a * r.powf(a - 1.0) / (1.0 + ra)
            }
            RadialWeight::Custom { dw, .. } => dw(r),
        }
    }

    pub fn ddw(&self, r: f64) -> f64 {
        match self {
            RadialWeight::Lebesgue => 0.0,
            RadialWeight::Gaussian => 1.0,
            RadialWeight::Power { alpha } => (alpha - 1.0) * r.powf(alpha - 2.0),
            RadialWeight::HeavyTail { a, b } => {
                let ra = r.powf(*a);
                b * a * r.powf(a - 2.0) * ((a - 1.0) - ra) / (1.0 + ra).powi(2)
            }
            RadialWeight::Custom { ddw, .. } => ddw(r),
        }
    }

    /// Finite limit of w'(r)/r at the origin, when it exists. This is the
    /// transverse eigenvalue of the potential Hessian at 0.
    fn origin_transverse(&self) -> Option<f64> {
        match self {
            RadialWeight::Lebesgue => Some(0.0),
            RadialWeight::Gaussian => Some(1.0),
            RadialWeight::Power { alpha } => match alpha {
                a if *a == 2.0 => Some(1.0),
                a if *a > 2.0 => Some(0.0),
                _ => None,
            },
            RadialWeight::HeavyTail { a, b } => match a {
                x if *x == 2.0 => Some(2.0 * b),
                x if *x > 2.0 => Some(0.0),
                _ => None,
            },
            RadialWeight::Custom { .. } => None,
        }
    }

    pub fn family_name(&self) -> &str {
        match self {
            RadialWeight::Lebesgue => "lebesgue",
            RadialWeight::Gaussian => "gaussian",
            RadialWeight::Power { .. } => "power",
            RadialWeight::HeavyTail { .. } => "heavy_tail",
            RadialWeight::Custom { name, .. } => name,
        }
    }
}

/// Outcome of the admissibility scan of a radial weight.
#[derive(Debug, Clone)]
pub struct WeightCertificate {
    pub admissible: bool,
    pub min_slope: f64,
    pub min_slope_at: f64,
    pub min_geodesic: f64,
    pub min_geodesic_at: f64,
}

/// Scan w' >= 0 and r^2 w'' + r w' >= 0 on a geometric grid of 513 radii
/// spanning [1e-6, 1e6].
pub fn validate_weight(weight: &RadialWeight) -> Result<WeightCertificate> {
    const POINTS: usize = 513;
    let (lo, hi) = (1e-6f64, 1e6f64);
    let ratio = (hi / lo).ln();
    let mut cert = WeightCertificate {
        admissible: true,
        min_slope: f64::INFINITY,
        min_slope_at: lo,
        min_geodesic: f64::INFINITY,
        min_geodesic_at: lo,
    };
    for i in 0..POINTS {
        let r = lo * (ratio * i as f64 / (POINTS - 1) as f64).exp();
        let dw = weight.dw(r);
        let geo = r * r * weight.ddw(r) + r * dw;
        if !dw.is_finite() || !geo.is_finite() {
            return Err(Error::NonFiniteIntegrand(format!(
                "weight derivatives not finite at r = {r}"
            )));
        }
        if dw < cert.min_slope {
            cert.min_slope = dw;
            cert.min_slope_at = r;
        }
        if geo < cert.min_geodesic {
            cert.min_geodesic = geo;
            cert.min_geodesic_at = r;
        }
    }
    cert.admissible = cert.min_slope >= -1e-10 && cert.min_geodesic >= -1e-10;
    Ok(cert)
}

/// First and second derivatives of the ambient potential W(x) = w(|x|).
#[derive(Debug, Clone, Copy)]
pub struct PotentialData {
    pub value: f64,
    pub grad: Point,
    pub hess: Mat3,
}

/// A rotationally invariant measure on R^n.
#[derive(Debug, Clone)]
pub struct WeightedMeasure {
    pub weight: RadialWeight,
    pub dim: usize,
}

impl WeightedMeasure {
    pub fn new(weight: RadialWeight, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::OutOfRange(format!("dimension {dim} not in 1..=3")));
        }
        Ok(WeightedMeasure { weight, dim })
    }

    pub fn density(&self, x: &Point) -> f64 {
        (-self.weight.w(num::norm(x))).exp()
    }

    /// W, grad W and Hess W at x. At the origin the radial limit is used;
    /// families whose transverse curvature w'(r)/r diverges there (power
    /// alpha < 2, heavy tail a < 2) report SINGULAR_ORIGIN.
    pub fn potential_eval(&self, x: &Point) -> Result<PotentialData> {
        let r = num::norm(x);
        let w = &self.weight;
        if r < 1e-14 {
            let trans = w.origin_transverse().ok_or_else(|| {
                Error::SingularOrigin(format!(
                    "potential Hessian of {} has no radial limit at the origin",
                    w.family_name()
                ))
            })?;
            let mut hess = num::MAT3_ZERO;
            for d in 0..self.dim {
                hess[d][d] = trans;
            }
            return Ok(PotentialData { value: w.w(0.0), grad: num::ZERO3, hess });
        }
        let u = num::scale(x, 1.0 / r);
        let dw = w.dw(r);
        let ddw = w.ddw(r);
        let mut hess = num::MAT3_ZERO;
        let trans = dw / r;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let uu = u[i] * u[j];
                let id = if i == j { 1.0 } else { 0.0 };
                hess[i][j] = trans * (id - uu) + ddw * uu;
            }
        }
        Ok(PotentialData {
            value: w.w(r),
            grad: num::scale(&u, dw),
            hess,
        })
    }

    /// Weighted Laplacian L_mu u = Delta u - <grad W, grad u> at x.
    pub fn lmu_apply(&self, u: &dyn ScalarC2, x: &Point) -> Result<f64> {
        let pot = self.potential_eval(x)?;
        let h = u.hess(x);
        let mut lap = 0.0;
        for d in 0..self.dim {
            lap += h[d][d];
        }
        Ok(lap - num::dot(&pot.grad, &u.grad(x)))
    }

    /// L_mu applied to a radial profile u(r) with derivatives u', u''.
    pub fn lmu_radial(&self, r: f64, du: f64, ddu: f64) -> f64 {
        let curv = if r > 0.0 { (self.dim as f64 - 1.0) * du / r } else { 0.0 };
        ddu + curv - self.weight.dw(r) * du
    }
}
