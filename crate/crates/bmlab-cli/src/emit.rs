//! Report files: one JSON document plus one flat CSV table per run.
//!
//! JSON floats are printed by serde_json with the shortest decimal that
//! parses back to the same bits, so a re-ingested report is identical to the
//! emitted one. CSV floats carry 17 significant digits for the same reason.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use bmlab::marginals::ProfileReport;

pub fn write_json<T: Serialize>(dir: &Path, report: &T) -> Result<PathBuf, String> {
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| format!("cannot serialize report: {e}"))?;
    text.push('\n');
    fs::write(&path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_table(dir: &Path, name: &str, header: &str, rows: &[String]) -> Result<PathBuf, String> {
    let path = dir.join(name);
    let mut text = String::with_capacity(16 + 24 * rows.len());
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(&path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

/// One row per interior stencil point: t, the profile value there, and the
/// grid-step second difference.
pub fn write_profile_csv(dir: &Path, report: &ProfileReport) -> Result<PathBuf, String> {
    let rows: Vec<String> = report
        .stencil
        .iter()
        .map(|s| {
            let value = report
                .points
                .iter()
                .find(|p| p.t.to_bits() == s.t.to_bits())
                .map(|p| p.value)
                .unwrap_or(f64::NAN);
            format!("{},{},{}", float17(s.t), float17(value), float17(s.d2))
        })
        .collect();
    write_table(dir, "profile.csv", "t,phi,d2phi", &rows)
}

/// One row per instance margin, in instance order.
pub fn write_margin_csv(dir: &Path, margins: &[f64]) -> Result<PathBuf, String> {
    let rows: Vec<String> = margins
        .iter()
        .enumerate()
        .map(|(i, m)| format!("{i},{}", float17(*m)))
        .collect();
    write_table(dir, "margins.csv", "instance,margin", &rows)
}

/// Sampled torsion function across the ball.
pub fn write_torsion_csv(dir: &Path, profile: &[[f64; 2]]) -> Result<PathBuf, String> {
    let rows: Vec<String> = profile
        .iter()
        .map(|[r, u]| format!("{},{}", float17(*r), float17(*u)))
        .collect();
    write_table(dir, "profile.csv", "r,u", &rows)
}

/// Single-row table for one second-variation evaluation.
pub fn write_point_csv(dir: &Path, t0: f64, phi: f64, phi_dd: f64) -> Result<PathBuf, String> {
    let row = format!("{},{},{}", float17(t0), float17(phi), float17(phi_dd));
    write_table(dir, "profile.csv", "t,phi,d2phi", &[row])
}
