use std::path::Path;

use serde::{Deserialize, Serialize};

use super::case::{case_dir, run_case, CaseResult, CaseSetup};
use crate::config::{GeometryConfig, RunConfig};
use crate::continuation::Outcome;
use crate::error::{IoError, RunError};
use crate::io::summary::{read_json, write_json, RunSummary};
use crate::io::timeseries::real;

/// The strip table: one row per fiber stiffness, the input to RVE sizing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSummary {
    pub geometry: GeometryConfig,
    pub cases: Vec<RunSummary>,
}

impl StripSummary {
    pub fn wavelength(&self, mu_fiber: f64) -> Option<f64> {
        self.cases.iter().find(|c| c.mu_fiber == mu_fiber).and_then(|c| c.wavelength)
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        write_json(&dir.join("strip_summary.json"), self)?;
        let path = dir.join("strip_summary.csv");
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |v: Option<f64>| v.map(real).unwrap_or_default();
        let mut rows = vec![vec![
            "mu_fiber".to_string(),
            "g_cr1".into(),
            "g_cr2".into(),
            "wavelength".into(),
            "outcome".into(),
            "accepted_steps".into(),
            "halvings".into(),
        ]];
        for c in &self.cases {
            let outcome = match c.outcome {
                Outcome::ReachedGmax => "reached_g_max",
                Outcome::Stalled { .. } => "stalled",
                Outcome::Stopped => "stopped_after_buckling",
            };
            rows.push(vec![
                real(c.mu_fiber),
                fmt(c.g_cr1),
                fmt(c.g_cr2),
                fmt(c.wavelength),
                outcome.into(),
                c.accepted_steps.to_string(),
                c.halvings.to_string(),
            ]);
        }
        for r in rows {
            w.write_record(r).map_err(|e| IoError::format(&path, e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| IoError::format(&path, e.to_string()))?;
        std::fs::write(&path, bytes).map_err(|e| IoError::io(&path, e))
    }
}

pub fn read_strip_summary(path: &Path) -> Result<StripSummary, IoError> {
    read_json(path)
}

pub struct StripReport {
    pub summary: StripSummary,
    pub cases: Vec<CaseResult>,
}

impl StripReport {
    pub fn any_stalled(&self) -> bool {
        self.cases.iter().any(CaseResult::stalled)
    }
}

/// Setup for one strip case under `out`.
pub fn strip_case(cfg: &RunConfig, mu_fiber: f64, resume: bool) -> CaseSetup {
    CaseSetup {
        mu_fiber,
        geometry: cfg.geometry,
        dir: case_dir(&cfg.outputs.directory, mu_fiber),
        stop_after: Some(cfg.study.steps_after_buckling),
        resume,
    }
}

/// Runs every `study.mu_fibers` case past its first event and writes the strip table. Stalled
/// cases stay in the table with their outcome.
pub fn run_strip(cfg: &RunConfig, resume: bool) -> Result<StripReport, RunError> {
    let dir = cfg.prepare_output_dir()?;
    super::write_resolved_config(&dir, cfg)?;
    let mut cases = Vec::new();
    for &mu in &cfg.study.mu_fibers {
        cases.push(run_case(cfg, &strip_case(cfg, mu, resume))?);
    }
    let summary = StripSummary { geometry: cfg.geometry, cases: cases.iter().map(|c| c.summary.clone()).collect() };
    summary.write(&dir)?;
    Ok(StripReport { summary, cases })
}
