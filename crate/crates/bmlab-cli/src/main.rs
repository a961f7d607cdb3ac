//! bmlab: command-line front end for the marginal concavity laboratory.
//!
//! Every command reads one JSON config, runs the corresponding library
//! pipeline, writes `report.json` plus a flat CSV table into `--out`, and
//! prints a one-line summary. Exit code 0 means no proved statement was
//! violated on the run, 1 means some theorem-status verdict came back
//! violated, and 2 means the run never produced a verdict (unreadable or
//! malformed config, rejected parameters, unwritable output).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use bmlab::inequalities::{find_check, CheckReport, TheoremStatus, Verdict, WeightSpec};
use bmlab::marginals::{b_profile_check, ProfileReport, ProfileVerdict};
use bmlab::measures::validate_weight;
use bmlab::search::{search_min_margin, InstanceSpec};
use bmlab::variation::{second_variation, SecondVariation};

mod config;
mod emit;

use config::{BProfileConfig, ProfileConfig, SecondVariationConfig, TorsionConfig};

#[derive(Parser)]
#[command(name = "bmlab", version, about = "Numerical laboratory for concavity of weighted marginals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuadChoice {
    Polar,
    Mc,
}

#[derive(Args)]
struct Common {
    /// JSON instance description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving report.json and the CSV table.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Replaces the seed of the config: the top-level `seed` field where one
    /// exists, otherwise the `seed` of the quadrature block.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the mode of the config's quadrature block.
    #[arg(long, value_enum)]
    quad: Option<QuadChoice>,
    /// Worker threads for batch commands. The BMLAB_JOBS environment
    /// variable overrides this flag.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Profile phi(t) on a uniform grid with a concavity verdict.
    MarginalProfile(Common),
    /// Exact second-variation formula at one point of the family.
    SecondVariation(Common),
    /// One registered inequality check.
    Check {
        /// Registered check name; see the registry listing on error.
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Profile t -> log mu(e^t K) with a concavity verdict.
    BProfile(Common),
    /// Weighted torsional rigidity of a centered ball.
    Torsion(Common),
    /// Randomized margin search over a registered target.
    Search(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::MarginalProfile(c)
            | Command::SecondVariation(c)
            | Command::BProfile(c)
            | Command::Torsion(c)
            | Command::Search(c) => c,
            Command::Check { common, .. } => common,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: &Command) -> Result<ExitCode, String> {
    let common = command.common();
    if let Some(jobs) = effective_jobs(common.jobs)? {
        // Best effort; search results do not depend on the pool size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    fs::create_dir_all(&common.out)
        .map_err(|e| format!("cannot create output directory {}: {e}", common.out.display()))?;
    match command {
        Command::MarginalProfile(c) => run_marginal_profile(c),
        Command::SecondVariation(c) => run_second_variation(c),
        Command::Check { name, common } => run_check(name, common),
        Command::BProfile(c) => run_b_profile(c),
        Command::Torsion(c) => run_torsion(c),
        Command::Search(c) => run_search(c),
    }
}

fn effective_jobs(flag: Option<usize>) -> Result<Option<usize>, String> {
    let jobs = match std::env::var("BMLAB_JOBS") {
        Ok(s) => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("BMLAB_JOBS must be a positive integer, got {s:?}"))?,
        ),
        Err(std::env::VarError::NotPresent) => flag,
        Err(e) => return Err(format!("BMLAB_JOBS: {e}")),
    };
    if jobs == Some(0) {
        return Err("worker thread count must be positive".into());
    }
    Ok(jobs)
}

/// Read a config file into a JSON value; malformed text reports the line and
/// column of the failure.
fn load_value(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed config {}: {e}", path.display()))
}

/// Deserialize with the failing field path in the diagnostic.
fn parse_config<T: DeserializeOwned>(value: Value) -> Result<T, String> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            format!("config error: {inner}")
        } else {
            format!("config error at field `{path}`: {inner}")
        }
    })
}

fn required_config(common: &Common) -> Result<&Path, String> {
    common
        .config
        .as_deref()
        .ok_or_else(|| "this command requires --config <path>".to_string())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SeedSlot {
    /// The config's own top-level seed field (search specs).
    TopLevel,
    /// The seed inside the quadrature block, created when absent.
    Quad,
}

fn apply_overrides(
    value: &mut Value,
    slot: SeedSlot,
    seed: Option<u64>,
    quad: Option<QuadChoice>,
) -> Result<(), String> {
    if seed.is_none() && quad.is_none() {
        return Ok(());
    }
    let obj = value
        .as_object_mut()
        .ok_or_else(|| "config must be a JSON object".to_string())?;
    if let Some(s) = seed {
        if slot == SeedSlot::TopLevel || obj.contains_key("seed") {
            obj.insert("seed".into(), json!(s));
        } else {
            let q = obj.entry("quad").or_insert_with(|| json!({}));
            q.as_object_mut()
                .ok_or_else(|| "config field `quad` must be an object".to_string())?
                .insert("seed".into(), json!(s));
        }
    }
    if let Some(mode) = quad {
        if slot == SeedSlot::TopLevel {
            return Err("search configs have no quadrature block; --quad does not apply".into());
        }
        let name = match mode {
            QuadChoice::Polar => "polar",
            QuadChoice::Mc => "mc",
        };
        let q = obj.entry("quad").or_insert_with(|| json!({}));
        q.as_object_mut()
            .ok_or_else(|| "config field `quad` must be an object".to_string())?
            .insert("mode".into(), json!(name));
    }
    Ok(())
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn status_str(s: TheoremStatus) -> &'static str {
    match s {
        TheoremStatus::Theorem => "theorem",
        TheoremStatus::Exploratory => "exploratory",
    }
}

fn profile_verdict_str(v: ProfileVerdict) -> &'static str {
    match v {
        ProfileVerdict::Concave => "concave",
        ProfileVerdict::Violated => "violated",
        ProfileVerdict::Inconclusive => "inconclusive-near-noise",
    }
}

/// Whether the weight family satisfies the standing admissibility
/// assumptions; an uncertifiable weight downgrades the run to exploratory.
fn weight_admissible(weight: &WeightSpec) -> bool {
    weight
        .build()
        .and_then(|w| validate_weight(&w))
        .map(|cert| cert.admissible)
        .unwrap_or(false)
}

fn profile_exit(status: TheoremStatus, verdict: ProfileVerdict) -> ExitCode {
    if status == TheoremStatus::Theorem && verdict == ProfileVerdict::Violated {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

#[derive(Serialize)]
struct ProfilePayload {
    command: &'static str,
    admissible: bool,
    theorem_status: TheoremStatus,
    profile: ProfileReport,
}

fn run_marginal_profile(common: &Common) -> Result<ExitCode, String> {
    let mut value = load_value(required_config(common)?)?;
    apply_overrides(&mut value, SeedSlot::Quad, common.seed, common.quad)?;
    let cfg: ProfileConfig = parse_config(value)?;
    let problem = cfg.problem().map_err(|e| e.to_string())?;
    let report = problem
        .concavity_report(&cfg.grid.points(), &cfg.quad.spec())
        .map_err(|e| e.to_string())?;
    let admissible = weight_admissible(&cfg.weight);
    let status = if admissible { TheoremStatus::Theorem } else { TheoremStatus::Exploratory };
    let payload =
        ProfilePayload { command: "marginal-profile", admissible, theorem_status: status, profile: report };
    let json_path = emit::write_json(&common.out, &payload)?;
    let csv_path = emit::write_profile_csv(&common.out, &payload.profile)?;
    println!(
        "marginal-profile: verdict {}, min d2 phi {:.6e} at t = {}, admissible {}",
        profile_verdict_str(payload.profile.verdict),
        payload.profile.min_d2,
        payload.profile.argmin_t,
        admissible,
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(profile_exit(status, payload.profile.verdict))
}

#[derive(Serialize)]
struct SecondVariationPayload {
    command: &'static str,
    /// Independent quadrature value of phi(t0) with its error estimate.
    phi_quad: f64,
    phi_quad_error: f64,
    report: SecondVariation,
}

fn run_second_variation(common: &Common) -> Result<ExitCode, String> {
    let mut value = load_value(required_config(common)?)?;
    apply_overrides(&mut value, SeedSlot::Quad, common.seed, common.quad)?;
    let cfg: SecondVariationConfig = parse_config(value)?;
    let problem = cfg.problem().map_err(|e| e.to_string())?;
    let report = second_variation(&problem, cfg.t0).map_err(|e| e.to_string())?;
    let phi = problem.phi(cfg.t0, &cfg.quad.spec()).map_err(|e| e.to_string())?;
    let payload = SecondVariationPayload {
        command: "second-variation",
        phi_quad: phi.value,
        phi_quad_error: phi.error,
        report,
    };
    let json_path = emit::write_json(&common.out, &payload)?;
    let csv_path =
        emit::write_point_csv(&common.out, report.t0, report.phi_t0, report.phi_dd)?;
    println!(
        "second-variation: value {:.10e}, phi'' {:.10e} at t0 = {}",
        report.value, report.phi_dd, report.t0,
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(ExitCode::SUCCESS)
}

fn check_exit(report: &CheckReport) -> ExitCode {
    if report.theorem_status == TheoremStatus::Theorem && report.verdict == Verdict::Violated {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_check(name: &str, common: &Common) -> Result<ExitCode, String> {
    let check = find_check(name).map_err(|e| e.to_string())?;
    let mut params = match &common.config {
        Some(path) => load_value(path)?,
        None => check.default_params(),
    };
    apply_overrides(&mut params, SeedSlot::Quad, common.seed, common.quad)?;
    let report = check.run(&params).map_err(|e| e.to_string())?;
    let json_path = emit::write_json(&common.out, &report)?;
    let csv_path = emit::write_margin_csv(&common.out, &[report.margin])?;
    println!(
        "check {}: margin {:.6e}, verdict {}, status {}",
        report.name,
        report.margin,
        verdict_str(report.verdict),
        status_str(report.theorem_status),
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(check_exit(&report))
}

fn run_b_profile(common: &Common) -> Result<ExitCode, String> {
    let mut value = load_value(required_config(common)?)?;
    apply_overrides(&mut value, SeedSlot::Quad, common.seed, common.quad)?;
    let cfg: BProfileConfig = parse_config(value)?;
    let grid = std::sync::Arc::new(
        bmlab::geometry::DirectionGrid::standard(cfg.dim).map_err(|e| e.to_string())?,
    );
    let body = cfg.body.build(grid).map_err(|e| e.to_string())?;
    let mu = cfg.weight.measure(cfg.dim).map_err(|e| e.to_string())?;
    let report = b_profile_check(&body, &mu, &cfg.grid.points(), &cfg.quad.spec())
        .map_err(|e| e.to_string())?;
    let admissible = weight_admissible(&cfg.weight);
    let status = if admissible { TheoremStatus::Theorem } else { TheoremStatus::Exploratory };
    let payload =
        ProfilePayload { command: "b-profile", admissible, theorem_status: status, profile: report };
    let json_path = emit::write_json(&common.out, &payload)?;
    let csv_path = emit::write_profile_csv(&common.out, &payload.profile)?;
    println!(
        "b-profile: verdict {}, min d2 {:.6e} at t = {}, admissible {}",
        profile_verdict_str(payload.profile.verdict),
        payload.profile.min_d2,
        payload.profile.argmin_t,
        admissible,
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(profile_exit(status, payload.profile.verdict))
}

#[derive(Serialize)]
struct TorsionPayload {
    command: &'static str,
    weight: WeightSpec,
    report: bmlab::inequalities::TorsionSolve,
}

fn run_torsion(common: &Common) -> Result<ExitCode, String> {
    let mut value = load_value(required_config(common)?)?;
    apply_overrides(&mut value, SeedSlot::Quad, common.seed, common.quad)?;
    let cfg: TorsionConfig = parse_config(value)?;
    let w = cfg.weight.build().map_err(|e| e.to_string())?;
    let report =
        bmlab::inequalities::torsion_solve(cfg.dim, cfg.r0, &w).map_err(|e| e.to_string())?;
    let payload = TorsionPayload { command: "torsion", weight: cfg.weight, report };
    let json_path = emit::write_json(&common.out, &payload)?;
    let csv_path = emit::write_torsion_csv(&common.out, &payload.report.profile)?;
    println!(
        "torsion: tau {:.10e}, energy {:.10e}, error {:.2e}",
        payload.report.tau, payload.report.energy, payload.report.error,
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_search(common: &Common) -> Result<ExitCode, String> {
    let mut value = load_value(required_config(common)?)?;
    apply_overrides(&mut value, SeedSlot::TopLevel, common.seed, common.quad)?;
    let spec: InstanceSpec = parse_config(value)?;
    let report = search_min_margin(&spec).map_err(|e| e.to_string())?;
    let json_path = emit::write_json(&common.out, &report)?;
    let csv_path = emit::write_margin_csv(&common.out, &report.margins)?;
    println!(
        "search {}: {} instances, min margin {:.6e} at index {}, theorem violations {}",
        report.target,
        report.total,
        report.min_margin,
        report.argmin.index,
        report.theorem_violations,
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    if report.theorem_violations > 0 {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
