//! Stratified Monte Carlo in a bounding ball. Radius strata of equal volume
//! keep the estimator variance down for radially concentrated densities, and
//! per-stratum counter streams make results independent of thread count.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::SymmetricBody;
use crate::measures::WeightedMeasure;
use crate::num;
use crate::{Error, Point, Result};

use super::IntegralEstimate;

pub(crate) const STRATA: usize = 8;

/// Integrate f(x) e^{-w(|x|)} over the body by sampling its bounding ball.
pub(crate) fn integrate(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    body: &SymmetricBody,
    mu: &WeightedMeasure,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<IntegralEstimate> {
    let g = |x: &Point| {
        if body.contains(x) {
            f(x) * mu.density(x)
        } else {
            0.0
        }
    };
    ball_mc(&g, &num::ZERO3, body.circumradius(), body.dim(), samples, seed, stream)
}

/// Stratified uniform sampling of the ball B(center, radius) in dimension n.
/// f is the full integrand including any density factors; the error field is
/// one standard error of the stratified estimator.
pub(crate) fn ball_mc(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    center: &Point,
    radius: f64,
    n: usize,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<IntegralEstimate> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::NotPositive(format!("sampling radius {radius}")));
    }
    let per = samples.div_ceil(STRATA).max(2);
    let vk = ball_volume(n, radius) / STRATA as f64;
    let ni = n as i32;
    let mut value = 0.0;
    let mut var = 0.0;
    for k in 0..STRATA {
        let lo = radius * (k as f64 / STRATA as f64).powf(1.0 / n as f64);
        let hi = radius * ((k + 1) as f64 / STRATA as f64).powf(1.0 / n as f64);
        let (lon, hin) = (lo.powi(ni), hi.powi(ni));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream.wrapping_mul(STRATA as u64).wrapping_add(k as u64 + 1));
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..per {
            let theta = sphere_dir(&mut rng, n);
            let u: f64 = rng.random();
            // Radius with density proportional to r^{n-1} within the shell.
            let r = (lon + u * (hin - lon)).powf(1.0 / n as f64);
            let x = num::add(center, &num::scale(&theta, r));
            let v = f(&x);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand(format!(
                    "sample at ({}, {}, {})",
                    x[0], x[1], x[2]
                )));
            }
            sum += v;
            sumsq += v * v;
        }
        let m = per as f64;
        let mean = sum / m;
        let sample_var = ((sumsq - sum * sum / m) / (m - 1.0)).max(0.0);
        value += vk * mean;
        var += vk * vk * sample_var / m;
    }
    Ok(IntegralEstimate { value, error: var.sqrt() })
}

fn ball_volume(n: usize, r: f64) -> f64 {
    match n {
        1 => 2.0 * r,
        2 => PI * r * r,
        _ => 4.0 * PI * r.powi(3) / 3.0,
    }
}

fn sphere_dir(rng: &mut ChaCha8Rng, n: usize) -> Point {
    if n == 1 {
        return [if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0, 0.0];
    }
    loop {
        let mut v = num::ZERO3;
        let mut i = 0;
        while i < n {
            let (a, b) = gauss_pair(rng);
            v[i] = a;
            if i + 1 < n {
                v[i + 1] = b;
            }
            i += 2;
        }
        let nrm = num::norm(&v);
        if nrm > 1e-12 {
            return num::scale(&v, 1.0 / nrm);
        }
    }
}

fn gauss_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    (r * c, r * s)
}
