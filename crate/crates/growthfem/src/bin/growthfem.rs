//! `growthfem verify | strip | rve`. Exit codes: 0 success, 1 check or runtime failure,
//! 2 configuration error, 3 a continuation stalled.

use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitCode};

use clap::{Args, Parser, Subcommand};
use growthfem::config::RunConfig;
use growthfem::drivers::{self, CaseResult, StripSummary};
use growthfem::error::{ConfigError, RunError};
use growthfem::io::summary::{read_json, write_json, RunSummary};

#[derive(Parser)]
#[command(name = "growthfem", version, about = "Growth-driven wrinkling of fiber-reinforced bilayers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the consistency checks and write verify_report.json.
    Verify(Common),
    /// Long-strip sweep: first buckling and wavelength per fiber stiffness.
    Strip(Common),
    /// Periodic cell of side 2 λ_cr, run to g_max.
    Rve(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides outputs.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated fiber stiffnesses (overrides study.mu_fibers).
    #[arg(long, value_delimiter = ',')]
    mu_fiber: Option<Vec<f64>>,
    /// Multiplies every element count of the configured geometry.
    #[arg(long)]
    mesh_scale: Option<f64>,
    /// Continue each case from its checkpoint when one exists.
    #[arg(long)]
    resume: bool,
    /// Cases run as this many concurrent worker processes.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Worker mode: run the cases without writing the sweep table.
    #[arg(long, hide = true)]
    case_only: bool,
}

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_STALLED: u8 = 3;

fn resolve(c: &Common) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &c.out {
        cfg.outputs.directory = out.clone();
    }
    if let Some(mu) = &c.mu_fiber {
        cfg.study.mu_fibers = mu.clone();
    }
    if let Some(f) = c.mesh_scale {
        if !(f > 0.0 && f.is_finite()) {
            return Err(ConfigError::invalid("--mesh-scale", format!("must be positive, got {f}")));
        }
        cfg.geometry = cfg.geometry.refined(f);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if matches!(e, RunError::Config(_)) { EXIT_CONFIG } else { EXIT_CHECK })
}

fn report_case(s: &RunSummary) {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    println!(
        "mu_fiber {:>8}  g_cr1 {}  g_cr2 {}  wavelength {}  steps {}  {:?}  ({:.1} s)",
        s.mu_fiber,
        opt(s.g_cr1),
        opt(s.g_cr2),
        opt(s.wavelength),
        s.accepted_steps,
        s.outcome,
        s.runtime_seconds
    );
}

fn stalled_code(cases: &[CaseResult]) -> ExitCode {
    if cases.iter().any(CaseResult::stalled) {
        ExitCode::from(EXIT_STALLED)
    } else {
        ExitCode::SUCCESS
    }
}

/// Runs every case in its own worker process, at most `jobs` at a time, then collects the
/// per-case summaries.
fn run_workers(kind: &str, cfg: &RunConfig, c: &Common) -> Result<Vec<RunSummary>, RunError> {
    let dir = cfg.prepare_output_dir()?;
    let resolved = dir.join("config.json");
    write_json(&resolved, cfg)?;
    let exe = std::env::current_exe().map_err(|e| growthfem::error::IoError::io("current_exe", e))?;
    let spawn = |mu: f64| -> Result<Child, RunError> {
        let mut cmd = Command::new(&exe);
        cmd.arg(kind).arg("--config").arg(&resolved).arg("--mu-fiber").arg(mu.to_string()).arg("--case-only");
        if c.resume {
            cmd.arg("--resume");
        }
        cmd.spawn().map_err(|e| growthfem::error::IoError::io(&exe, e).into())
    };
    let mut pending: Vec<f64> = cfg.study.mu_fibers.iter().rev().copied().collect();
    let mut running: Vec<Child> = Vec::new();
    while !pending.is_empty() || !running.is_empty() {
        while running.len() < c.jobs && !pending.is_empty() {
            running.push(spawn(pending.pop().unwrap())?);
        }
        let mut child = running.remove(0);
        child.wait().map_err(|e| growthfem::error::IoError::io(&exe, e))?;
    }
    let mut out = Vec::new();
    for &mu in &cfg.study.mu_fibers {
        let path = dir.join(drivers::case_dir_name(mu)).join("summary.json");
        out.push(read_json::<RunSummary>(&path)?);
    }
    Ok(out)
}

fn sweep(kind: &str, c: &Common) -> Result<ExitCode, RunError> {
    let cfg = resolve(c)?;
    if c.jobs > 1 && cfg.study.mu_fibers.len() > 1 && !c.case_only {
        let summaries = run_workers(kind, &cfg, c)?;
        let dir = &cfg.outputs.directory;
        if kind == "strip" {
            StripSummary { geometry: cfg.geometry, cases: summaries.clone() }.write(dir)?;
        } else {
            write_json(&dir.join("rve_summary.json"), &summaries)?;
        }
        summaries.iter().for_each(report_case);
        let stalled = summaries.iter().any(|s| matches!(s.outcome, growthfem::continuation::Outcome::Stalled { .. }));
        return Ok(if stalled { ExitCode::from(EXIT_STALLED) } else { ExitCode::SUCCESS });
    }
    let cases = if c.case_only {
        let mut cases = Vec::new();
        for &mu in &cfg.study.mu_fibers {
            let setup = if kind == "strip" {
                drivers::strip_case(&cfg, mu, c.resume)
            } else {
                drivers::rve_case(&cfg, mu, c.resume)?
            };
            cases.push(drivers::run_case(&cfg, &setup)?);
        }
        cases
    } else if kind == "strip" {
        drivers::run_strip(&cfg, c.resume)?.cases
    } else {
        drivers::run_rve(&cfg, c.resume)?.cases
    };
    cases.iter().for_each(|case| report_case(&case.summary));
    Ok(stalled_code(&cases))
}

fn verify(c: &Common) -> Result<ExitCode, RunError> {
    let cfg = resolve(c)?;
    let report = drivers::run_verify(&cfg)?;
    for check in &report.checks {
        println!("{:<36} {}", check.name, if check.passed { "ok" } else { "FAIL" });
    }
    println!("report: {}", Path::new(&cfg.outputs.directory).join("verify_report.json").display());
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CHECK) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Verify(c) => verify(c),
        Cmd::Strip(c) => sweep("strip", c),
        Cmd::Rve(c) => sweep("rve", c),
    };
    result.unwrap_or_else(fail)
}
