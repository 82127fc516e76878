use std::path::{Path, PathBuf};
use std::time::Instant;

use growthfem_core::analysis::extract_wavelength;
use growthfem_core::assembly::{Constraints, Model};
use growthfem_core::mesh::{build_bilayer_box, Axis};

use crate::config::{GeometryConfig, RunConfig};
use crate::continuation::{continuation_resume, AcceptedStep, ContinuationState, Monitor, Outcome, StepControl};
use crate::error::{IoError, RunError};
use crate::io::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use crate::io::mesh_json::write_mesh_json;
use crate::io::summary::{write_json, RunSummary};
use crate::io::timeseries::write_timeseries_csv;
use crate::io::vtu::{write_pvd, write_vtu, FieldData};

/// One continuation: a fiber stiffness on a given box.
#[derive(Clone, Debug)]
pub struct CaseSetup {
    pub mu_fiber: f64,
    pub geometry: GeometryConfig,
    pub dir: PathBuf,
    /// Stop this many accepted steps after the first event instead of running to `g_max`.
    pub stop_after: Option<usize>,
    /// Continue from `checkpoint.json` in `dir` when present.
    pub resume: bool,
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub summary: RunSummary,
    pub steps: Vec<AcceptedStep>,
    pub dir: PathBuf,
}

impl CaseResult {
    pub fn stalled(&self) -> bool {
        matches!(self.summary.outcome, Outcome::Stalled { .. })
    }
}

/// `mu_100`, `mu_2.5`: Display of the value keeps names short and unique.
pub fn case_dir_name(mu_fiber: f64) -> String {
    format!("mu_{mu_fiber}")
}

const CHECKPOINT: &str = "checkpoint.json";

pub fn run_case(cfg: &RunConfig, case: &CaseSetup) -> Result<CaseResult, RunError> {
    let start = Instant::now();
    let dir = &case.dir;
    std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;

    let mut resolved = cfg.clone();
    resolved.geometry = case.geometry;
    resolved.materials.film.mu_fiber = case.mu_fiber;
    resolved.study.mu_fibers = vec![case.mu_fiber];
    resolved.outputs.directory = dir.clone();
    resolved.validate()?;
    super::write_resolved_config(dir, &resolved)?;

    let mesh = build_bilayer_box(&case.geometry.box_spec())?;
    write_mesh_json(&dir.join("mesh.json"), &mesh)?;
    let model = Model::new(
        mesh,
        resolved.materials.film,
        resolved.materials.substrate,
        resolved.growth.kind,
        resolved.growth.m0,
        &Constraints::periodic_clamped(),
    )?;
    let probe_wavelength = cfg.study.probe_wavelength.unwrap_or(case.geometry.ly / 5.0);
    let monitor = Monitor::new(&model, probe_wavelength, 4 * case.geometry.nx);
    let continuation = resolved.continuation();

    let checkpoint_path = dir.join(CHECKPOINT);
    let initial = if case.resume && checkpoint_path.exists() {
        read_checkpoint(&checkpoint_path)?
            .restore(&model)
            .map_err(|m| IoError::format(&checkpoint_path, m))?
    } else {
        ContinuationState::initial(&model, &continuation)
    };

    let vtu_every = cfg.outputs.vtu_every_n_steps;
    let fields_dir = dir.join("fields");
    if vtu_every > 0 {
        std::fs::create_dir_all(&fields_dir).map_err(|e| IoError::io(&fields_dir, e))?;
    }
    let mut frames: Vec<(f64, String)> = Vec::new();
    let checkpoint_every = cfg.outputs.checkpoint_every_g;
    let bucket = |g: f64| checkpoint_every.map(|dg| (g / dg + 1e-9).floor() as i64);
    let mut last_bucket = bucket(initial.g);

    let result = continuation_resume(&model, &continuation, &resolved.perturbation, &monitor, initial, &mut |v| {
        let step = v.step;
        if vtu_every > 0 && step.step % vtu_every == 0 {
            let name = format!("step_{:06}.vtu", step.step);
            let displacement = v.model.dofs.expand(v.free);
            let energies = v.model.cell_energies(v.free, step.g)?;
            let fields = FieldData { displacement: &displacement, mixed: &v.assembly.mixed, energies: &energies };
            write_vtu(&fields_dir.join(&name), &v.model.mesh, Some(&fields))?;
            frames.push((step.g, format!("fields/{name}")));
        }
        let b = bucket(step.g);
        if b != last_bucket {
            last_bucket = b;
            write_checkpoint(&checkpoint_path, &Checkpoint::capture(v.model, v.state))?;
        }
        if let (Some(n), Some(first)) = (case.stop_after, v.events.first()) {
            if v.state.steps.len() >= first.step + n {
                return Ok(StepControl::Stop);
            }
        }
        Ok(StepControl::Continue)
    })?;

    let state = &result.state;
    write_timeseries_csv(&dir.join("timeseries.csv"), &state.steps)?;
    if checkpoint_every.is_some() {
        write_checkpoint(&checkpoint_path, &Checkpoint::capture(&model, state))?;
    }
    if !frames.is_empty() {
        write_pvd(&dir.join("fields.pvd"), &frames)?;
    }
    let wavelength = if result.events.is_empty() {
        None
    } else {
        let nodal = model.dofs.expand(&state.free);
        extract_wavelength(&model.mesh, &nodal, Axis::Y, case.geometry.element_size() / 2.0).ok()
    };
    let event = |mode: usize| result.events.iter().find(|e| e.mode == mode).map(|e| e.g_cr);
    let summary = RunSummary {
        mu_fiber: case.mu_fiber,
        g_cr1: event(1),
        g_cr2: event(2),
        wavelength,
        runtime_seconds: start.elapsed().as_secs_f64(),
        outcome: result.outcome,
        accepted_steps: state.steps.len(),
        halvings: result.halvings,
        events: result.events.clone(),
        detector: monitor.detector,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(CaseResult { summary, steps: result.state.steps, dir: dir.clone() })
}

pub(crate) fn case_dir(out: &Path, mu_fiber: f64) -> PathBuf {
    out.join(case_dir_name(mu_fiber))
}
