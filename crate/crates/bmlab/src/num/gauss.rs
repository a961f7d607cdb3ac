//! Gauss quadrature rules on [-1, 1].
//!
//! Gauss-Legendre nodes come from Newton iteration on the Legendre recurrence;
//! Gauss-Jacobi nodes (weight (1-x)^a (1+x)^b) from the Golub-Welsch
//! eigenproblem of the Jacobi recurrence matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Legendre polynomial value and derivative at `x`, degree `k`.
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gauss_legendre_raw(k: usize) -> Vec<(f64, f64)> {
    assert!(k >= 1);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(k, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(k, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Cached Gauss-Legendre node/weight pairs on [-1, 1], ascending nodes.
pub fn gauss_legendre(k: usize) -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static [(f64, f64)]>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(k)
        .or_insert_with(|| Box::leak(gauss_legendre_raw(k).into_boxed_slice()))
}

/// Gauss-Jacobi rule for weight (1-x)^a (1+x)^b on [-1, 1], ascending nodes.
/// Exact for polynomials of degree 2k-1 against that weight.
pub fn gauss_jacobi(k: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    assert!(k >= 1 && a > -1.0 && b > -1.0);
    // Recurrence coefficients of the monic Jacobi polynomials.
    let mut diag = vec![0.0; k];
    let mut off = vec![0.0; k.saturating_sub(1)];
    diag[0] = (b - a) / (a + b + 2.0);
    for j in 1..k {
        let jf = j as f64;
        let s = 2.0 * jf + a + b;
        diag[j] = (b * b - a * a) / (s * (s + 2.0));
        let num = 4.0 * jf * (jf + a) * (jf + b) * (jf + a + b);
        let den = s * s * (s + 1.0) * (s - 1.0);
        off[j - 1] = (num / den).sqrt();
    }
    let mut t = DMatrix::zeros(k, k);
    for j in 0..k {
        t[(j, j)] = diag[j];
        if j + 1 < k {
            t[(j, j + 1)] = off[j];
            t[(j + 1, j)] = off[j];
        }
    }
    let eig = SymmetricEigen::new(t);
    // Total mass of the weight: 2^(a+b+1) B(a+1, b+1).
    let mu0 = 2f64.powf(a + b + 1.0) * beta_fn(a + 1.0, b + 1.0);
    let mut out: Vec<(f64, f64)> = (0..k)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Euler beta function via the Lanczos log-gamma approximation.
fn beta_fn(x: f64, y: f64) -> f64 {
    (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp()
}

/// Lanczos approximation, g = 7, accurate to ~1e-14 for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = C[0];
    for (i, &c) in C.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // int_{-1}^{1} x^14 dx = 2/15, degree within 2*8-1.
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert_abs_diff_eq!(s, 2.0 / 15.0, epsilon = 1e-14);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn legendre_handles_large_order() {
        let rule = gauss_legendre(128);
        let s: f64 = rule.iter().map(|&(x, w)| w * (x * x)).sum();
        assert_abs_diff_eq!(s, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_total_mass_and_moment() {
        // Weight (1-x)^{1/2} on [-1,1]: mass 2^{3/2} * B(3/2, 1) = 2^{3/2} * 2/3.
        let rule = gauss_jacobi(12, 0.5, 0.0);
        let mass: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_abs_diff_eq!(mass, 2f64.powf(1.5) * 2.0 / 3.0, epsilon = 1e-12);
        // int (1-x)^{1/2} x dx over [-1,1] = 2^{5/2} (1/3 - 2/5).
        let m1: f64 = rule.iter().map(|&(x, w)| w * x).sum();
        let exact = 2f64.powf(2.5) * (1.0 / 3.0 - 2.0 / 5.0);
        assert_abs_diff_eq!(m1, exact, epsilon = 1e-12);
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        assert_abs_diff_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ln_gamma(5.0), 24f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            epsilon = 1e-12
        );
    }
}
