//! The three workflows: verification report, long-strip wavelength sweep and RVE study. Each
//! case writes into its own directory, starting with the resolved configuration that produced it.

mod case;
mod rve;
mod strip;

use std::path::Path;

pub use case::{case_dir_name, run_case, CaseResult, CaseSetup};
pub use rve::{lambda_for, rve_case, rve_geometry, run_rve, RveReport};
pub use strip::{read_strip_summary, run_strip, strip_case, StripReport, StripSummary};

use crate::config::RunConfig;
use crate::error::RunError;
use crate::io::summary::write_json;
use crate::verify::{run_verify_checks, VerifyReport};

/// Runs the check suite and writes `verify_report.json` into the output directory.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport, RunError> {
    let dir = cfg.prepare_output_dir()?;
    write_json(&dir.join("config.json"), cfg)?;
    let report = run_verify_checks(cfg);
    write_json(&dir.join("verify_report.json"), &report)?;
    Ok(report)
}

/// Writes `cfg` as `config.json` in `dir`.
pub(crate) fn write_resolved_config(dir: &Path, cfg: &RunConfig) -> Result<(), RunError> {
    write_json(&dir.join("config.json"), cfg)?;
    Ok(())
}
