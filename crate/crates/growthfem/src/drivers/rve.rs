use super::case::{case_dir, run_case, CaseResult, CaseSetup};
use super::strip::read_strip_summary;
use crate::config::{GeometryConfig, RunConfig};
use crate::error::{ConfigError, RunError};
use crate::io::summary::{write_json, RunSummary};

/// Square periodic cell of side `2 λ_cr` at the configured element size and layer counts.
pub fn rve_geometry(base: &GeometryConfig, lambda_cr: f64) -> GeometryConfig {
    let side = 2.0 * lambda_cr;
    let n = ((side / base.element_size()).round() as usize).max(1);
    GeometryConfig { lx: side, ly: side, nx: n, ny: n, ..*base }
}

/// `study.lambda_cr` when given, else the wavelength recorded for `mu_fiber` in the strip table.
pub fn lambda_for(cfg: &RunConfig, mu_fiber: f64) -> Result<f64, ConfigError> {
    if let Some(l) = cfg.study.lambda_cr {
        return Ok(l);
    }
    let Some(path) = &cfg.study.strip_summary else {
        return Err(ConfigError::invalid("study.lambda_cr", "required when study.strip_summary is absent"));
    };
    let table = read_strip_summary(path)?;
    table.wavelength(mu_fiber).ok_or_else(|| {
        ConfigError::invalid("study.strip_summary", format!("{} has no wavelength for mu_fiber = {mu_fiber}", path.display()))
    })
}

pub fn rve_case(cfg: &RunConfig, mu_fiber: f64, resume: bool) -> Result<CaseSetup, ConfigError> {
    let lambda = lambda_for(cfg, mu_fiber)?;
    Ok(CaseSetup {
        mu_fiber,
        geometry: rve_geometry(&cfg.geometry, lambda),
        dir: case_dir(&cfg.outputs.directory, mu_fiber),
        stop_after: None,
        resume,
    })
}

pub struct RveReport {
    pub cases: Vec<CaseResult>,
}

impl RveReport {
    pub fn any_stalled(&self) -> bool {
        self.cases.iter().any(CaseResult::stalled)
    }
}

/// Runs every `study.mu_fibers` case to `g_max` on its `2 λ_cr` cell; writes `rve_summary.json`.
pub fn run_rve(cfg: &RunConfig, resume: bool) -> Result<RveReport, RunError> {
    let setups = cfg.study.mu_fibers.iter().map(|&mu| rve_case(cfg, mu, resume)).collect::<Result<Vec<_>, _>>()?;
    let dir = cfg.prepare_output_dir()?;
    super::write_resolved_config(&dir, cfg)?;
    let mut cases = Vec::new();
    for setup in &setups {
        cases.push(run_case(cfg, setup)?);
    }
    let summaries: Vec<&RunSummary> = cases.iter().map(|c| &c.summary).collect();
    write_json(&dir.join("rve_summary.json"), &summaries)?;
    Ok(RveReport { cases })
}
