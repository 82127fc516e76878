//! Growth continuation: fixed increments, halving on Newton failure, reset after the first
//! bifurcation.

use growthfem_core::analysis::{
    detect_bifurcations, transverse_spread, BifurcationEvent, DetectorConfig, HistoryPoint, ProbeSet, TopSurface,
};
use growthfem_core::assembly::{Assembly, Model};
use growthfem_core::element::MixedElementState;
use growthfem_core::perturbation::{apply_perturbation, PerturbationSpec};
use growthfem_core::AnalysisError;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, RunError};
use crate::linear::LinearSolver;
use crate::newton::{newton_solve, NewtonConfig, StepRecord};

/// Linear-solve acceptance inside Newton. Tangents near a bifurcation are too ill-conditioned for
/// the strict solve tolerance; the nonlinear residual decides convergence instead.
pub const NEWTON_SOLVE_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    pub dt0: f64,
    pub max_halvings: usize,
    pub newton_max_iter: usize,
    pub newton_rel_tol: f64,
    pub newton_abs_tol: f64,
    /// Set from `growth.g_max` of the run configuration, so not part of this section's JSON.
    #[serde(skip)]
    pub g_max: f64,
    pub reset_after_buckling: bool,
    /// See [`NewtonConfig::check_stability`].
    pub check_stability: bool,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            dt0: 1e-4,
            max_halvings: 5,
            newton_max_iter: 20,
            newton_rel_tol: 1e-8,
            newton_abs_tol: 1e-10,
            g_max: 0.04,
            reset_after_buckling: true,
            check_stability: true,
        }
    }
}

impl ContinuationConfig {
    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig { max_iter: self.newton_max_iter, rel_tol: self.newton_rel_tol, abs_tol: self.newton_abs_tol, check_stability: self.check_stability }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::invalid(format!("continuation.{field}"), format!("must be positive, got {v}")))
            }
        };
        positive("dt0", self.dt0)?;
        positive("newton_rel_tol", self.newton_rel_tol)?;
        positive("newton_abs_tol", self.newton_abs_tol)?;
        positive("g_max", self.g_max)?;
        if self.newton_max_iter == 0 {
            return Err(ConfigError::invalid("continuation.newton_max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Computes the detector inputs from a converged state.
#[derive(Clone, Debug)]
pub struct Monitor {
    pub surface: TopSurface,
    pub probes: ProbeSet,
    pub height: f64,
    pub detector: DetectorConfig,
    pub transverse_samples: usize,
}

impl Monitor {
    pub fn new(model: &Model, probe_wavelength: f64, transverse_samples: usize) -> Monitor {
        Monitor {
            surface: TopSurface::new(&model.mesh),
            probes: ProbeSet::on_centerline(&model.mesh, probe_wavelength),
            height: model.mesh.extent()[2],
            detector: DetectorConfig::default(),
            transverse_samples: transverse_samples.max(2),
        }
    }

    pub fn observe(&self, model: &Model, free: &[f64]) -> Result<([f64; 3], f64), AnalysisError> {
        let nodal = model.dofs.expand(free);
        let probes = self.probes.values(&self.surface, &nodal)?;
        let spread = transverse_spread(&self.surface, &nodal, self.probes.points[0][1], self.transverse_samples)?;
        Ok((probes, spread))
    }
}

/// One accepted growth step: the row written to the time-series CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptedStep {
    pub step: usize,
    pub g: f64,
    pub dt: f64,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub negative_pivots: usize,
    pub probes: [f64; 3],
    pub transverse_spread: f64,
    /// Film iso/vol/ani then substrate iso/vol/ani.
    pub energies: [f64; 6],
}

impl AcceptedStep {
    pub fn history_point(&self) -> HistoryPoint {
        HistoryPoint {
            g: self.g,
            probes: self.probes,
            transverse_spread: self.transverse_spread,
            energy: self.energies.iter().sum(),
        }
    }
}

/// Everything needed to resume a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationState {
    pub g: f64,
    pub dt: f64,
    pub free: Vec<f64>,
    pub bifurcated: bool,
    pub steps: Vec<AcceptedStep>,
    pub mixed: Vec<[f64; 4]>,
}

impl ContinuationState {
    pub fn initial(model: &Model, cfg: &ContinuationConfig) -> ContinuationState {
        ContinuationState {
            g: 0.0,
            dt: cfg.dt0,
            free: vec![0.0; model.num_free()],
            bifurcated: false,
            steps: Vec::new(),
            mixed: vec![[1.0, 0.0, 1.0, 0.0]; model.mesh.num_cells()],
        }
    }

    pub fn history(&self) -> Vec<HistoryPoint> {
        self.steps.iter().map(AcceptedStep::history_point).collect()
    }
}

fn pack_mixed(m: &[MixedElementState]) -> Vec<[f64; 4]> {
    m.iter().map(|s| [s.theta, s.p, s.lambda_bar, s.s]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    ReachedGmax,
    /// Halving exhausted at this growth level.
    Stalled { g: f64, dt: f64 },
    /// The step hook asked to stop.
    Stopped,
}

#[derive(Clone, Debug)]
pub struct ContinuationResult {
    /// Every Newton attempt, failed ones included.
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
    pub state: ContinuationState,
    pub events: Vec<BifurcationEvent>,
    pub halvings: usize,
}

pub struct StepView<'a> {
    pub model: &'a Model,
    pub step: &'a AcceptedStep,
    pub free: &'a [f64],
    pub assembly: &'a Assembly,
    pub state: &'a ContinuationState,
    pub events: &'a [BifurcationEvent],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Stop,
}

pub fn continuation_run(
    model: &Model,
    cfg: &ContinuationConfig,
    perturbation: &PerturbationSpec,
    monitor: &Monitor,
    hook: &mut dyn FnMut(&StepView<'_>) -> Result<StepControl, RunError>,
) -> Result<ContinuationResult, RunError> {
    continuation_resume(model, cfg, perturbation, monitor, ContinuationState::initial(model, cfg), hook)
}

pub fn continuation_resume(
    model: &Model,
    cfg: &ContinuationConfig,
    perturbation: &PerturbationSpec,
    monitor: &Monitor,
    mut state: ContinuationState,
    hook: &mut dyn FnMut(&StepView<'_>) -> Result<StepControl, RunError>,
) -> Result<ContinuationResult, RunError> {
    cfg.validate()?;
    let newton = cfg.newton();
    let mut solver = LinearSolver::with_tolerance(NEWTON_SOLVE_TOLERANCE);
    let mut tangent = model.tangent_pattern();
    let mut records = Vec::new();
    let mut halvings = 0;
    let mu_subs = model.substrate.mu0;
    let mut events = detect_bifurcations(&state.history(), monitor.height, &monitor.detector);
    let g_end = cfg.g_max * (1.0 - 1e-12);

    while state.g < g_end {
        let mut dt = state.dt.min(cfg.g_max - state.g);
        let mut attempts = 0;
        let (free, assembly, iterations, residual, pivots) = loop {
            let g_new = state.g + dt;
            let load = apply_perturbation(perturbation, &model.mesh, mu_subs, g_new);
            let external = perturbation.is_active(g_new).then_some(load.as_slice());
            let out = newton_solve(model, &mut solver, &mut tangent, &state.free, g_new, dt, external, &newton);
            let iterations = out.record.iterations;
            let residual = out.record.final_residual();
            let pivots = out.record.negative_pivots;
            records.push(out.record);
            if let Some((free, assembly)) = out.solution {
                break (free, assembly, iterations, residual, pivots);
            }
            if attempts == cfg.max_halvings {
                return Ok(ContinuationResult {
                    records,
                    outcome: Outcome::Stalled { g: state.g, dt },
                    state,
                    events,
                    halvings,
                });
            }
            attempts += 1;
            halvings += 1;
            dt *= 0.5;
            state.dt = dt;
        };
        state.g += dt;
        let (probes, spread) = monitor.observe(model, &free)?;
        let step = AcceptedStep {
            step: state.steps.len() + 1,
            g: state.g,
            dt,
            newton_iters: iterations,
            final_residual: residual,
            negative_pivots: pivots,
            probes,
            transverse_spread: spread,
            energies: assembly.energy.components(),
        };
        state.steps.push(step);
        state.free = free;
        state.mixed = pack_mixed(&assembly.mixed);
        events = detect_bifurcations(&state.history(), monitor.height, &monitor.detector);
        if !state.bifurcated && !events.is_empty() {
            state.bifurcated = true;
            if cfg.reset_after_buckling {
                state.dt = cfg.dt0;
            }
        }
        let view =
            StepView { model, step: &step, free: &state.free, assembly: &assembly, state: &state, events: &events };
        if hook(&view)? == StepControl::Stop {
            return Ok(ContinuationResult { records, outcome: Outcome::Stopped, state, events, halvings });
        }
    }
    Ok(ContinuationResult { records, outcome: Outcome::ReachedGmax, state, events, halvings })
}
