use std::f64::consts::PI;
use std::sync::Arc;

use prgd::linalg::{column, Mat};
use prgd::manifold::{SharedManifold, Sphere};
use prgd::objective::{Objective, Quadratic};
use prgd::optimizer::{
    derive_thresholds, practical_thresholds, prgd_step, rgd_baseline, run, AssumptionParams, OptState,
    PracticalOverrides, RunStatus, StepOutcome, ThresholdSet,
};
use prgd::rng::seeded;
use proptest::prelude::*;

fn sphere3() -> SharedManifold {
    Arc::new(Sphere::new(3).unwrap())
}

fn fig1_objective() -> Quadratic {
    Quadratic::new(vec![1.0, -1.0, 4.0], sphere3()).unwrap()
}

fn params(epsilon: f64) -> AssumptionParams {
    AssumptionParams {
        beta: 10.0,
        rho: 10.0,
        curvature_k: 1.0,
        injectivity: PI,
        epsilon,
        delta: 0.1,
        f_gap: 5.0,
        dim_d: 2,
        rho_hat: 10.0,
    }
}

fn saddle_thresholds() -> ThresholdSet {
    let o = PracticalOverrides {
        eta: Some(0.05),
        r: Some(1e-3),
        g_thres: Some(1e-4),
        t_thres: Some(200),
        f_thres: Some(1e-8),
    };
    practical_thresholds(&params(1e-4), 4.0, &o).unwrap().thresholds
}

fn point(m: &SharedManifold, v: &[f64]) -> prgd::manifold::Point {
    m.point(column(v)).unwrap()
}

#[test]
fn theory_thresholds_match_hand_evaluation() {
    let p = AssumptionParams {
        beta: 8.0,
        rho: 8.0,
        curvature_k: 1.0,
        injectivity: PI,
        epsilon: 0.1,
        delta: 0.1,
        f_gap: 2.0,
        dim_d: 2,
        rho_hat: 8.0,
    };
    let t = derive_thresholds(&p, 4.0).unwrap().thresholds;
    // Evaluated by hand from the constants box, independently of the library.
    let expect = [
        (t.c_max, 1.2456154336734693e-06),
        (t.chi, 26.96159046198592),
        (t.r, 1.535327310012351e-07),
        (t.f_thres, 7.105627953361329e-13),
        (t.g_thres, 1.535327310012351e-07),
        (t.eta, 1.5570192920918366e-07),
        (t.gamma, 0.8944271909999159),
        (t.kappa, 8.94427190999916),
        (t.script_f, 9.980542489349674e-11),
        (t.script_g, 4.148605105382997e-06),
        (t.script_s, 2.405758619059569e-05),
        (t.script_t, 37243969.23704066),
    ];
    for (i, (got, want)) in expect.iter().enumerate() {
        assert!((got - want).abs() <= 1e-12 * want.abs(), "field {i}: {got} vs {want}");
    }
    assert_eq!(t.t_thres, 193_600_521);
}

#[test]
fn figure_one_escapes_to_minimum() {
    let obj = fig1_objective();
    let m = obj.manifold().clone();
    let x0 = point(&m, &[1.0, 0.0, 0.0]);
    let thr = saddle_thresholds();
    for seed in 0..5 {
        let res = run(&obj, &x0, &thr, 20_000, &mut seeded(seed)).unwrap();
        assert_eq!(res.status, RunStatus::SecondOrderPoint);
        assert!((res.final_f + 1.0).abs() <= 1e-6, "f = {}", res.final_f);
        let y = res.final_point.coords()[1].abs();
        assert!((1.0 - y).abs() < 1e-6);
        assert!(res.trace.rows[0].perturbed);
    }
}

#[test]
fn exact_minimum_stops_after_one_window() {
    let obj = fig1_objective();
    let m = obj.manifold().clone();
    let x0 = point(&m, &[0.0, 1.0, 0.0]);
    let thr = saddle_thresholds();
    let res = run(&obj, &x0, &thr, 20_000, &mut seeded(3)).unwrap();
    assert_eq!(res.status, RunStatus::SecondOrderPoint);
    assert_eq!(res.iterations, thr.t_thres);
    assert_eq!(res.final_point.coords(), x0.coords());
    assert_eq!(res.trace.rows.iter().filter(|r| r.perturbed).count(), 1);
}

#[test]
fn constant_objective_terminates_at_first_window() {
    let obj = Quadratic::new(vec![0.0; 3], sphere3()).unwrap();
    let m = obj.manifold().clone();
    let x0 = point(&m, &[0.6, 0.0, 0.8]);
    let thr = saddle_thresholds();
    let res = run(&obj, &x0, &thr, 10_000, &mut seeded(1)).unwrap();
    assert_eq!(res.status, RunStatus::SecondOrderPoint);
    assert_eq!(res.final_f, 0.0);
    assert_eq!(res.iterations, thr.t_thres);
}

#[test]
fn iteration_cap_is_reported() {
    let obj = fig1_objective();
    let m = obj.manifold().clone();
    let x0 = point(&m, &[1.0, 0.0, 0.0]);
    let res = run(&obj, &x0, &saddle_thresholds(), 10, &mut seeded(0)).unwrap();
    assert_eq!(res.status, RunStatus::IterationCap);
    assert_eq!(res.iterations, 10);
    assert_eq!(res.trace.rows.len(), 10);
    assert_eq!(res.trace.terminal.as_ref().unwrap().total_iterations, 10);
}

#[test]
fn baseline_stalls_at_saddle() {
    let obj = fig1_objective();
    let m = obj.manifold().clone();
    let x0 = point(&m, &[1.0, 0.0, 0.0]);
    let res = rgd_baseline(&obj, &x0, 0.05, 1e-4, 1000).unwrap();
    assert_eq!(res.iterations, 0);
    assert_eq!(res.final_gradnorm, 0.0);
    assert_eq!(res.final_point.coords(), x0.coords());
}

#[test]
fn baseline_converges_from_generic_point() {
    let obj = fig1_objective();
    let m = obj.manifold().clone();
    let x0 = m.point(unit([0.5, 0.5, 0.7]).unwrap()).unwrap();
    let res = rgd_baseline(&obj, &x0, 0.05, 1e-6, 10_000).unwrap();
    assert_eq!(res.status, RunStatus::FirstOrderPoint);
    assert!(res.final_gradnorm <= 1e-6);
}

#[test]
fn identical_seed_gives_identical_trace() {
    let obj = fig1_objective();
    let m = obj.manifold().clone();
    let x0 = point(&m, &[1.0, 0.0, 0.0]);
    let thr = saddle_thresholds();
    let a = run(&obj, &x0, &thr, 20_000, &mut seeded(42)).unwrap();
    let b = run(&obj, &x0, &thr, 20_000, &mut seeded(42)).unwrap();
    assert_eq!(a.trace, b.trace);
    let c = run(&obj, &x0, &thr, 20_000, &mut seeded(43)).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn nan_objective_is_step_failure() {
    let obj = Quadratic::new(vec![f64::MAX, f64::MAX, f64::MAX], sphere3()).unwrap();
    let m = obj.manifold().clone();
    let x0 = point(&m, &[0.6, 0.0, 0.8]);
    let res = run(&obj, &x0, &saddle_thresholds(), 100, &mut seeded(0)).unwrap();
    assert_eq!(res.status, RunStatus::StepFailure);
    assert!(res.message.is_some());
}

fn unit(v: [f64; 3]) -> Option<Mat> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.1).then(|| column(&[v[0] / n, v[1] / n, v[2] / n]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_invariants(v in prop::array::uniform3(-1.0f64..1.0), seed in 0u64..1000, t0 in 0u64..400) {
        let Some(c) = unit(v) else { return Ok(()) };
        let obj = fig1_objective();
        let m = obj.manifold().clone();
        let thr = saddle_thresholds();
        let x = m.point(c).unwrap();
        let f0 = obj.value(&x).unwrap();
        let g = obj.rgrad(&x).unwrap().norm();
        let mut st = OptState::new(x.clone(), &thr);
        st.t = t0;
        let mut rng = seeded(seed);
        let StepOutcome::Continue(next) = prgd_step(st, &thr, &obj, &mut rng) else {
            panic!("unexpected termination");
        };
        let row = next.trace.rows.last().unwrap().clone();
        prop_assert!(row.step_norm <= (thr.eta * row.gradnorm).min(PI) + 1e-15);
        if row.perturbed {
            let (tilde, _) = next.x_tilde.clone().unwrap();
            prop_assert_eq!(tilde.coords(), x.coords());
        } else {
            let eta_bar = thr.eta.min(PI / g);
            let f1 = obj.value(&next.x).unwrap();
            prop_assert!(f1 <= f0 - 0.5 * eta_bar * g * g + 1e-12);
            prop_assert!(next.x_tilde.is_none());
        }
    }

    #[test]
    fn perturbation_stays_in_ball(v in prop::array::uniform3(-1.0f64..1.0), seed in 0u64..1000, r in 1e-6f64..0.5) {
        let Some(c) = unit(v) else { return Ok(()) };
        let obj = Quadratic::new(vec![0.0; 3], sphere3()).unwrap();
        let m = obj.manifold().clone();
        let mut thr = saddle_thresholds();
        thr.r = r;
        let x = m.point(c).unwrap();
        let StepOutcome::Continue(next) = prgd_step(OptState::new(x.clone(), &thr), &thr, &obj, &mut seeded(seed)) else {
            panic!("unexpected termination");
        };
        prop_assert!(next.trace.rows[0].perturbed);
        prop_assert!(m.dist(&x, &next.x).unwrap() <= r * (1.0 + 1e-12));
        prop_assert!(next.t_noise <= next.t as i64);
    }
}
