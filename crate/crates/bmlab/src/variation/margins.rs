//! Margins of the two auxiliary quadratic inequalities behind concavity
//! transfer: the hereditary bound that controls (int L_mu u dnu)^2 by the
//! Bochner bulk, and the spectral bound for even profiles.

use crate::measures::{validate_weight, RadialWeight, WeightedMeasure};
use crate::variation::{lmu_on_line, volume_integral, OneDimGeometry};
use crate::{Error, Result};

const EVEN_SAMPLES: usize = 64;

/// Reject interval data whose density factor or profile slope breaks the
/// even/odd symmetry the inequalities assume.
fn check_even_line(
    geom: &OneDimGeometry,
    nu_factor: &dyn Fn(f64) -> f64,
    du: &dyn Fn(f64) -> f64,
) -> Result<()> {
    let OneDimGeometry::Interval { r0 } = geom else {
        return Ok(());
    };
    for i in 1..=EVEN_SAMPLES {
        let c = r0 * i as f64 / EVEN_SAMPLES as f64;
        let (fp, fm) = (nu_factor(c), nu_factor(-c));
        if (fp - fm).abs() > 1e-8 * (1.0 + fp.abs() + fm.abs()) {
            return Err(Error::NotEven(format!(
                "density factor differs at +-{c}: {fp} vs {fm}"
            )));
        }
        let (dp, dm) = (du(c), du(-c));
        if (dp + dm).abs() > 1e-8 * (1.0 + dp.abs() + dm.abs()) {
            return Err(Error::NotEven(format!(
                "profile slope is not odd at +-{c}: {dp} vs {dm}"
            )));
        }
    }
    Ok(())
}

/// Margin of
///   int (|Hess u|^2 + <Hess W grad u, grad u>) dnu >= A^2 / D
/// for nu with density nu_factor e^{-W} on the geometry, where
/// A = int L_mu u dnu and D = int (n - <x, grad W>) dnu. When D degenerates
/// to zero the ratio term is dropped (its supremum form collapses).
pub fn hereditary_margin(
    mu: &WeightedMeasure,
    geom: &OneDimGeometry,
    nu_factor: &dyn Fn(f64) -> f64,
    du: &dyn Fn(f64) -> f64,
    ddu: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if geom.dim() != mu.dim {
        return Err(Error::GridMismatch(format!(
            "geometry dimension {} vs measure dimension {}",
            geom.dim(),
            mu.dim
        )));
    }
    check_even_line(geom, nu_factor, du)?;
    let nf = geom.dim() as f64;
    let dens = |c: f64| nu_factor(c) * (-mu.weight.w(c.abs())).exp();
    let mass = volume_integral(geom, &dens);
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::NotPositive(format!("nu mass {mass}")));
    }
    let t1 = volume_integral(geom, &|c| {
        let d = du(c);
        let trans = if geom.dim() >= 2 { (nf - 1.0) * (d / c) * (d / c) } else { 0.0 };
        (ddu(c) * ddu(c) + trans + mu.weight.ddw(c.abs()) * d * d) * dens(c)
    }) / mass;
    let a = volume_integral(geom, &|c| lmu_on_line(mu, geom, c, du(c), ddu(c)) * dens(c)) / mass;
    let d_mean =
        volume_integral(geom, &|c| (nf - c.abs() * mu.weight.dw(c.abs())) * dens(c)) / mass;
    let ratio = if d_mean.abs() < 1e-12 { 0.0 } else { a * a / d_mean };
    Ok(t1 - ratio)
}

/// Margin of
///   int |Hess v|^2 dnu >= int (w'(|x|)/|x|) |grad v|^2 dnu
/// for even profiles v and admissible radial weights w.
pub fn spectral_margin(
    weight: &RadialWeight,
    dim: usize,
    geom: &OneDimGeometry,
    nu_factor: &dyn Fn(f64) -> f64,
    dv: &dyn Fn(f64) -> f64,
    ddv: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if geom.dim() != dim {
        return Err(Error::GridMismatch(format!(
            "geometry dimension {} vs requested dimension {dim}",
            geom.dim()
        )));
    }
    let cert = validate_weight(weight)?;
    if !cert.admissible {
        return Err(Error::NotNonnegative(
            "weight fails the monotonicity or geodesic convexity scan".into(),
        ));
    }
    check_even_line(geom, nu_factor, dv)?;
    let nf = dim as f64;
    let dens = |c: f64| nu_factor(c) * (-weight.w(c.abs())).exp();
    let mass = volume_integral(geom, &dens);
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::NotPositive(format!("nu mass {mass}")));
    }
    let hess = volume_integral(geom, &|c| {
        let d = dv(c);
        let trans = if dim >= 2 { (nf - 1.0) * (d / c) * (d / c) } else { 0.0 };
        (ddv(c) * ddv(c) + trans) * dens(c)
    }) / mass;
    let slope = volume_integral(geom, &|c| {
        let r = c.abs();
        let d = dv(c);
        let q = if r > 0.0 { weight.dw(r) / r } else { weight.ddw(0.0) };
        q * d * d * dens(c)
    }) / mass;
    Ok(hess - slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hereditary_saturates_for_uniform_square() {
        // Flat weight on [-1, 1]: T1 = 1, A = 1, D = 1, margin 0.
        let mu = WeightedMeasure::new(RadialWeight::Lebesgue, 1).unwrap();
        let geom = OneDimGeometry::Interval { r0: 1.0 };
        let m = hereditary_margin(&mu, &geom, &|_| 1.0, &|c| c, &|_| 1.0).unwrap();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hereditary_gaussian_degenerate_denominator() {
        // With nu = mu gaussian, D = E(1 - x^2) = 0, so only the Bochner
        // bulk survives: 1 + E x^2 = 2.
        let mu = WeightedMeasure::new(RadialWeight::Gaussian, 1).unwrap();
        let geom = OneDimGeometry::Interval { r0: 10.0 };
        let m = hereditary_margin(&mu, &geom, &|_| 1.0, &|c| c, &|_| 1.0).unwrap();
        assert_abs_diff_eq!(m, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn hereditary_quartic_factor_stays_positive() {
        let mu = WeightedMeasure::new(RadialWeight::Gaussian, 1).unwrap();
        let geom = OneDimGeometry::Interval { r0: 2.0 };
        let m = hereditary_margin(
            &mu,
            &geom,
            &|c| (-c.powi(4)).exp(),
            &|c| c,
            &|_| 1.0,
        )
        .unwrap();
        assert!(m > 0.0, "margin {m}");
    }

    #[test]
    fn hereditary_rejects_odd_density_factor() {
        let mu = WeightedMeasure::new(RadialWeight::Lebesgue, 1).unwrap();
        let geom = OneDimGeometry::Interval { r0: 1.0 };
        let err = hereditary_margin(&mu, &geom, &|c| c.exp(), &|c| c, &|_| 1.0);
        assert!(matches!(err, Err(Error::NotEven(_))));
    }

    #[test]
    fn spectral_saturates_on_the_gaussian() {
        let geom = OneDimGeometry::Interval { r0: 10.0 };
        let m = spectral_margin(
            &RadialWeight::Gaussian,
            1,
            &geom,
            &|_| 1.0,
            &|c| c,
            &|_| 1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn spectral_gains_under_extra_log_concavity() {
        // nu ~ e^{-3x^2/2} has variance 1/3: margin 1 - 1/3 = 2/3.
        let geom = OneDimGeometry::Interval { r0: 8.0 };
        let m = spectral_margin(
            &RadialWeight::Gaussian,
            1,
            &geom,
            &|c| (-c * c).exp(),
            &|c| c,
            &|_| 1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(m, 2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn spectral_constant_profile_is_zero() {
        let geom = OneDimGeometry::RadialBall { r0: 1.0, dim: 2 };
        let m = spectral_margin(
            &RadialWeight::Gaussian,
            2,
            &geom,
            &|_| 1.0,
            &|_| 0.0,
            &|_| 0.0,
        )
        .unwrap();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-14);
    }
}
