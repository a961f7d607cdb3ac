//! One-shot margin checkers for the integral inequalities of the lab.
//!
//! Every checker consumes a JSON parameter object, evaluates both sides of
//! its inequality, and returns a [`CheckReport`] whose signed margin is
//! nonnegative exactly when the inequality holds on the instance. A verdict
//! of `violated` is only issued when the margin stays below minus the
//! tolerance under a second, independent quadrature mode, so a theorem is
//! never reported broken on the strength of one integrator.
//!
//! Checkers register themselves by name in [`registry`]; the search harness
//! and the command line both look instances up there.

pub mod bbl;
pub mod bm;
pub mod lift;
pub mod poincare;
pub mod profiles;
pub mod spec_types;
pub mod torsion;
pub mod variance;

pub use spec_types::{BodySpec, CapSpec, QuadOpts, WeightSpec};
pub use torsion::{torsion_solve, TorsionSolve};

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// Whether a negative margin on the instance contradicts a proved statement
/// or merely answers an open question on one example.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremStatus {
    Theorem,
    Exploratory,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// Signed; nonnegative means the inequality holds on the instance.
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub theorem_status: TheoremStatus,
    /// Whether the hypotheses were confirmed on the instance. A report with
    /// `hypothesis_ok = false` carries no information about the theorem.
    pub hypothesis_ok: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// The full instance achieving the margin, replayable through `run`.
    pub witness: Value,
}

/// Power mean with weight `lambda` on the first argument:
/// (lambda a^kappa + (1 - lambda) b^kappa)^(1/kappa) for finite nonzero
/// kappa, the maximum at +infinity, the minimum at -infinity, and the
/// geometric mean a^lambda b^(1-lambda) at zero. Arguments are clamped at 0;
/// a zero argument sends every nonpositive-kappa mean to 0.
pub fn kappa_mean(kappa: f64, lambda: f64, a: f64, b: f64) -> f64 {
    let a = a.max(0.0);
    let b = b.max(0.0);
    if kappa == f64::INFINITY {
        return a.max(b);
    }
    if kappa == f64::NEG_INFINITY {
        return a.min(b);
    }
    if kappa == 0.0 {
        return a.powf(lambda) * b.powf(1.0 - lambda);
    }
    if kappa < 0.0 && (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    (lambda * a.powf(kappa) + (1.0 - lambda) * b.powf(kappa)).powf(1.0 / kappa)
}

/// Exponent kappa/(1 + n kappa) transported to the integrated inequality in
/// dimension n. Maps +infinity to 1/n and the left endpoint -1/n of the
/// admissible range to -infinity.
pub fn dimensional_exponent(kappa: f64, n: usize) -> f64 {
    let nf = n as f64;
    if kappa == f64::INFINITY {
        return 1.0 / nf;
    }
    let den = 1.0 + nf * kappa;
    if den <= 0.0 {
        f64::NEG_INFINITY
    } else {
        kappa / den
    }
}

/// A named margin checker over JSON-described instances.
///
/// `random_params(seed, index, dim)` must be a pure function of its
/// arguments and must produce instances whose hypotheses hold by
/// construction, so a negative margin on a theorem-status report is always
/// meaningful. `run` must reproduce the reported margin bit-for-bit when fed
/// the witness back.
pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn default_params(&self) -> Value;
    fn random_params(&self, seed: u64, index: u64, dim: usize) -> Value;
    fn run(&self, params: &Value) -> Result<CheckReport>;
}

static REGISTRY: OnceLock<BTreeMap<&'static str, Box<dyn Check>>> = OnceLock::new();

pub fn registry() -> &'static BTreeMap<&'static str, Box<dyn Check>> {
    REGISTRY.get_or_init(|| {
        let checks: Vec<Box<dyn Check>> = vec![
            Box::new(bbl::Bbl),
            Box::new(bm::DimBm),
            Box::new(variance::BLocal),
            Box::new(variance::BrascampLieb),
            Box::new(poincare::Poincare),
            Box::new(torsion::TorsionBm),
            Box::new(torsion::TorsionSqrt),
            Box::new(lift::Lift),
            Box::new(profiles::Bochner),
            Box::new(profiles::Hereditary),
            Box::new(profiles::Spectral),
            Box::new(profiles::BProfile),
            Box::new(profiles::LogMarginal),
            Box::new(profiles::NegativeExponent),
        ];
        checks.into_iter().map(|c| (c.name(), c)).collect()
    })
}

pub fn find_check(name: &str) -> Result<&'static dyn Check> {
    registry().get(name).map(|c| c.as_ref()).ok_or_else(|| {
        let known: Vec<&str> = registry().keys().copied().collect();
        Error::BadConfig(format!(
            "unknown check {name:?}; available: {}",
            known.join(", ")
        ))
    })
}

pub fn run_check(name: &str, params: &Value) -> Result<CheckReport> {
    find_check(name)?.run(params)
}

/// Deserialize a parameter object, converting serde errors into BAD_CONFIG
/// with the offending field in the message.
pub(crate) fn parse_params<T: DeserializeOwned>(params: &Value) -> Result<T> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::BadConfig(format!("check parameters: {e}")))
}

/// Verdict from a margin and tolerance, confirming apparent violations with
/// an independent second evaluation `(margin, tolerance)` before committing.
pub(crate) fn settle_verdict(
    margin: f64,
    tol: f64,
    confirm: impl FnOnce() -> Result<(f64, f64)>,
) -> Result<Verdict> {
    if margin >= -tol {
        return Ok(Verdict::Holds);
    }
    let (second, tol2) = confirm()?;
    if second < -tol2 {
        Ok(Verdict::Violated)
    } else {
        Ok(Verdict::Inconclusive)
    }
}

/// Deterministic per-instance generator keyed by (check name, seed, index).
/// Independent of thread scheduling by construction.
pub(crate) fn instance_rng(name: &str, seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    let mut h = 0xcbf29ce484222325u64;
    for byte in name.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    key[16..24].copy_from_slice(&h.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Error of the ratio a/z given absolute errors on both.
pub(crate) fn ratio_err(a: f64, ea: f64, z: f64, ez: f64) -> f64 {
    ea / z + a.abs() * ez / (z * z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_mean_conventions() {
        assert_eq!(kappa_mean(f64::INFINITY, 0.3, 1.0, 2.0), 2.0);
        assert_eq!(kappa_mean(f64::NEG_INFINITY, 0.3, 1.0, 2.0), 1.0);
        let geo = kappa_mean(0.0, 0.25, 16.0, 1.0);
        assert!((geo - 2.0).abs() < 1e-12);
        let arith = kappa_mean(1.0, 0.25, 16.0, 1.0);
        assert!((arith - 4.75).abs() < 1e-12);
        // lambda weights the first argument.
        assert!(kappa_mean(1.0, 0.9, 10.0, 0.0) > kappa_mean(1.0, 0.1, 10.0, 0.0));
        // A vanishing argument annihilates nonpositive-exponent means.
        assert_eq!(kappa_mean(0.0, 0.5, 0.0, 5.0), 0.0);
        assert_eq!(kappa_mean(-0.5, 0.5, 0.0, 5.0), 0.0);
        assert!((kappa_mean(0.5, 0.5, 0.0, 4.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimensional_exponent_endpoints() {
        assert_eq!(dimensional_exponent(f64::INFINITY, 2), 0.5);
        assert_eq!(dimensional_exponent(0.0, 3), 0.0);
        assert_eq!(dimensional_exponent(-0.5, 2), f64::NEG_INFINITY);
        assert!((dimensional_exponent(1.0, 1) - 0.5).abs() < 1e-15);
        assert!((dimensional_exponent(2.0, 2) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn registry_is_complete_and_sorted() {
        let names: Vec<&str> = registry().keys().copied().collect();
        assert_eq!(
            names,
            vec![
                "b_local",
                "b_profile",
                "bbl",
                "bochner",
                "brascamp_lieb",
                "dim_bm",
                "hereditary",
                "lift",
                "log_marginal",
                "negative_exponent",
                "poincare",
                "spectral",
                "torsion_bm",
                "torsion_sqrt",
            ]
        );
        for (name, check) in registry() {
            assert_eq!(*name, check.name());
        }
    }

    #[test]
    fn unknown_check_is_a_config_error() {
        let err = find_check("no_such_check");
        assert!(matches!(err, Err(Error::BadConfig(_))));
    }

    #[test]
    fn every_default_instance_runs_and_replays() {
        for (name, check) in registry() {
            let params = check.default_params();
            let report = check
                .run(&params)
                .unwrap_or_else(|e| panic!("default {name} failed: {e}"));
            assert_eq!(&report.name, name);
            assert!(report.margin.is_finite());
            let again = check.run(&report.witness).unwrap();
            assert_eq!(report.margin, again.margin, "replay of {name}");
        }
    }

    #[test]
    fn random_params_are_deterministic_and_runnable() {
        for (name, check) in registry() {
            let a = check.random_params(7, 3, 1);
            let b = check.random_params(7, 3, 1);
            assert_eq!(a, b, "determinism of {name}");
            let c = check.random_params(7, 4, 1);
            assert_ne!(a, c, "index sensitivity of {name}");
            let report = check
                .run(&a)
                .unwrap_or_else(|e| panic!("random {name} failed: {e}"));
            assert!(report.margin.is_finite());
        }
    }
}
