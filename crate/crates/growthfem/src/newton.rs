//! Newton–Raphson on the condensed displacement system, with an optional stability check on
//! converged states.

use std::time::Instant;

use growthfem_core::assembly::{Assembly, Model, SymmetricCsc};
use serde::{Deserialize, Serialize};

use crate::linear::{norm, LinearSolver};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Accept a state that meets the residual test only if its tangent is positive definite.
    /// An unstable equilibrium is left along a direction of negative curvature with an energy
    /// line search (one iteration), after which Newton resumes. Without the check, plain Newton
    /// steps past a bifurcation converge to the unstable flat branch.
    pub check_stability: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { max_iter: 20, rel_tol: 1e-8, abs_tol: 1e-10, check_stability: false }
    }
}

/// One Newton solve attempt at a fixed growth level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub g: f64,
    pub dt: f64,
    pub iterations: usize,
    /// `‖r‖` at every evaluated iterate, starting with the predictor.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Negative tangent pivots in the last factorization.
    pub negative_pivots: usize,
    /// Iterations spent leaving unstable equilibria.
    pub escapes: usize,
    /// Seconds.
    pub wall_time: f64,
    /// Why a non-converged attempt stopped.
    pub failure: Option<String>,
}

impl StepRecord {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

pub struct NewtonOutcome {
    pub record: StepRecord,
    /// Converged free displacements and their assembly; `None` on failure.
    pub solution: Option<(Vec<f64>, Assembly)>,
}

/// Newton iterations from `start` at growth `g`. The caller's state is never modified; a
/// non-converged attempt (iteration cap, non-finite values, element inversion, singular
/// tangent, failed escape) is reported in the record.
pub fn newton_solve(
    model: &Model,
    solver: &mut LinearSolver,
    tangent: &mut SymmetricCsc,
    start: &[f64],
    g: f64,
    dt: f64,
    external: Option<&[f64]>,
    cfg: &NewtonConfig,
) -> NewtonOutcome {
    let clock = Instant::now();
    let mut u = start.to_vec();
    let mut history = Vec::new();
    let mut r0 = None;
    let mut pivots = 0;
    let mut escapes = 0;
    let finish = |history: Vec<f64>, iterations: usize, failure: Option<String>, pivots: usize, escapes: usize| {
        StepRecord {
            g,
            dt,
            iterations,
            residual_history: history,
            converged: failure.is_none(),
            negative_pivots: pivots,
            escapes,
            wall_time: clock.elapsed().as_secs_f64(),
            failure,
        }
    };
    let fail = |history, it, why: String, pivots, escapes| NewtonOutcome {
        record: finish(history, it, Some(why), pivots, escapes),
        solution: None,
    };
    for it in 0..=cfg.max_iter {
        let assembly = match model.assemble(&u, g, external, Some(tangent)) {
            Ok(a) => a,
            Err(e) => return fail(history, it, e.to_string(), pivots, escapes),
        };
        let rn = norm(&assembly.residual);
        history.push(rn);
        if !rn.is_finite() {
            return fail(history, it, "non-finite residual".into(), pivots, escapes);
        }
        let r0v = *r0.get_or_insert(rn);
        let small = rn <= (cfg.rel_tol * r0v).max(cfg.abs_tol);
        if small && !cfg.check_stability {
            return NewtonOutcome { record: finish(history, it, None, pivots, escapes), solution: Some((u, assembly)) };
        }
        if it == cfg.max_iter && !small {
            break;
        }
        let du = match solver.solve(tangent, &assembly.residual) {
            Ok(du) => du,
            Err(e) => return fail(history, it, e.to_string(), pivots, escapes),
        };
        pivots = solver.last_negative;
        if small {
            if pivots == 0 {
                return NewtonOutcome {
                    record: finish(history, it, None, pivots, escapes),
                    solution: Some((u, assembly)),
                };
            }
            if it == cfg.max_iter {
                break;
            }
            match escape(model, solver, tangent, &u, &assembly.residual, g, external) {
                Ok(next) => u = next,
                Err(why) => return fail(history, it, why, pivots, escapes),
            }
            escapes += 1;
            continue;
        }
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui -= di;
        }
    }
    let why = format!("no convergence in {} iterations", cfg.max_iter);
    fail(history, cfg.max_iter, why, pivots, escapes)
}

/// Moves `u` along a direction of negative curvature of the factorized tangent to the lowest
/// potential found on a doubling ladder of step lengths.
fn escape(
    model: &Model,
    solver: &LinearSolver,
    tangent: &SymmetricCsc,
    u: &[f64],
    residual: &[f64],
    g: f64,
    external: Option<&[f64]>,
) -> Result<Vec<f64>, String> {
    let curvature = |z: &[f64]| z.iter().zip(tangent.mul_vec(z)).map(|(a, b)| a * b).sum::<f64>();
    // the residual carries the imperfection, so it picks the mode the load favours; a fixed
    // aperiodic vector covers an exactly symmetric state
    let fallback: Vec<f64> = (0..u.len()).map(|i| ((i + 1) as f64).sin()).collect();
    let mut z = [residual, &fallback]
        .iter()
        .filter_map(|b| solver.negative_curvature(b))
        .find(|z| z.iter().any(|v| *v != 0.0) && curvature(z) < 0.0)
        .ok_or_else(|| "unstable state without a usable negative-curvature direction".to_string())?;
    let scale = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let slope: f64 = residual.iter().zip(&z).map(|(r, v)| r * v).sum();
    let sign = if slope > 0.0 { -1.0 } else { 1.0 };
    z.iter_mut().for_each(|v| *v *= sign / scale);

    let energy = |alpha: f64| {
        let trial: Vec<f64> = u.iter().zip(&z).map(|(a, b)| a + alpha * b).collect();
        model.potential(&trial, g, external).ok().filter(|e| e.is_finite())
    };
    let e0 = energy(0.0).ok_or_else(|| "potential not evaluable at the unstable state".to_string())?;
    let mut alpha = 1e-6 * model.mesh.length_scale();
    let mut best = (0.0, e0);
    for _ in 0..40 {
        match energy(alpha) {
            Some(e) if e < best.1 => best = (alpha, e),
            _ => break,
        }
        alpha *= 2.0;
    }
    if best.0 == 0.0 {
        return Err("no energy decrease along the negative-curvature direction".into());
    }
    Ok(u.iter().zip(&z).map(|(a, b)| a + best.0 * b).collect())
}
