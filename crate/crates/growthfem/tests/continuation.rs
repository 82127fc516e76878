mod common;

use common::{model, monitor, small_config};
use growthfem::continuation::{
    continuation_resume, continuation_run, ContinuationState, Outcome, StepControl,
};
use growthfem::io::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use growthfem_core::perturbation::PerturbationSpec;

fn keep_going(_: &growthfem::continuation::StepView<'_>) -> Result<StepControl, growthfem::error::RunError> {
    Ok(StepControl::Continue)
}

#[test]
fn homogeneous_growth_runs_without_halving() {
    let cfg = small_config();
    let m = model(&cfg);
    let res = continuation_run(&m, &cfg.continuation(), &PerturbationSpec::none(), &monitor(&cfg, &m), &mut keep_going)
        .unwrap();
    assert_eq!(res.outcome, Outcome::ReachedGmax);
    assert_eq!(res.halvings, 0);
    assert_eq!(res.state.steps.len(), 10);
    assert!((res.state.g - 0.001).abs() < 1e-15);
    assert!(res.state.steps.windows(2).all(|w| w[1].g > w[0].g));
    assert!(res.events.is_empty());
}

#[test]
fn exhausted_halving_leaves_the_last_accepted_state() {
    let mut cfg = small_config();
    let m = model(&cfg);
    let mon = monitor(&cfg, &m);
    cfg.growth.g_max = 0.0003;
    let before = continuation_run(&m, &cfg.continuation(), &PerturbationSpec::none(), &mon, &mut keep_going).unwrap();

    // One Newton iteration never meets the tolerance from a predictor.
    cfg.growth.g_max = 0.001;
    cfg.continuation.newton_max_iter = 1;
    cfg.continuation.max_halvings = 3;
    let res = continuation_resume(
        &m,
        &cfg.continuation(),
        &PerturbationSpec::none(),
        &mon,
        before.state.clone(),
        &mut keep_going,
    )
    .unwrap();
    let dt0 = cfg.continuation.dt0;
    assert_eq!(res.outcome, Outcome::Stalled { g: before.state.g, dt: dt0 / 8.0 });
    assert_eq!(res.halvings, 3);
    let tried: Vec<f64> = res.records.iter().map(|r| r.dt).collect();
    assert_eq!(tried, vec![dt0, dt0 / 2.0, dt0 / 4.0, dt0 / 8.0]);
    assert!(res.records.iter().all(|r| !r.converged));
    assert_eq!(res.state.free, before.state.free);
    assert_eq!(res.state.steps, before.state.steps);
    assert_eq!(res.state.g, before.state.g);
}

#[test]
fn identical_runs_are_bit_identical() {
    let cfg = small_config();
    let m = model(&cfg);
    let mon = monitor(&cfg, &m);
    let run = || continuation_run(&m, &cfg.continuation(), &cfg.perturbation, &mon, &mut keep_going).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.state, b.state);
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.residual_history, y.residual_history);
        assert_eq!(x.g, y.g);
    }
}

#[test]
fn resuming_from_a_checkpoint_matches_an_uninterrupted_run() {
    let cfg = small_config();
    let m = model(&cfg);
    let mon = monitor(&cfg, &m);
    let straight = continuation_run(&m, &cfg.continuation(), &cfg.perturbation, &mon, &mut keep_going).unwrap();

    let first = continuation_run(&m, &cfg.continuation(), &cfg.perturbation, &mon, &mut |v| {
        Ok(if v.step.step == 4 { StepControl::Stop } else { StepControl::Continue })
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checkpoint.json");
    write_checkpoint(&path, &Checkpoint::capture(&m, &first.state)).unwrap();
    let restored: ContinuationState = read_checkpoint(&path).unwrap().restore(&m).unwrap();
    assert_eq!(restored.free, first.state.free);

    let second = continuation_resume(&m, &cfg.continuation(), &cfg.perturbation, &mon, restored, &mut keep_going).unwrap();
    assert_eq!(second.state.steps, straight.state.steps);
    assert_eq!(second.state.free, straight.state.free);
}

#[test]
fn hook_can_stop_the_run() {
    let cfg = small_config();
    let m = model(&cfg);
    let res = continuation_run(&m, &cfg.continuation(), &cfg.perturbation, &monitor(&cfg, &m), &mut |v| {
        Ok(if v.step.step == 4 { StepControl::Stop } else { StepControl::Continue })
    })
    .unwrap();
    assert_eq!(res.outcome, Outcome::Stopped);
    assert_eq!(res.state.steps.len(), 4);
}

#[test]
fn probes_agree_before_buckling() {
    let cfg = small_config();
    let m = model(&cfg);
    let res = continuation_run(&m, &cfg.continuation(), &cfg.perturbation, &monitor(&cfg, &m), &mut keep_going)
        .unwrap();
    assert!(res.events.is_empty());
    let h = cfg.geometry.h;
    for s in &res.state.steps {
        assert!(s.history_point().probe_spread() <= 1e-6 * h, "spread {} at g = {}", s.history_point().probe_spread(), s.g);
    }
}
