use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::sync::Arc;

use prgd::linalg::column;
use prgd::manifold::{Euclidean, Point, SharedManifold, Sphere, Stiefel, Tangent};
use prgd::objective::{Linear, Quadratic, SharedObjective};
use prgd::optimizer::{practical_thresholds, AssumptionParams, PracticalOverrides};
use prgd::rng::seeded;
use prgd::verify::*;
use prgd::Error;

const SCALES: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn s2() -> SharedManifold {
    Arc::new(Sphere::new(3).unwrap())
}

fn p(m: &SharedManifold, v: &[f64]) -> Point {
    m.point(column(v)).unwrap()
}

fn t(m: &SharedManifold, x: &Point, v: &[f64]) -> Tangent {
    m.tangent(x, column(v)).unwrap()
}

fn sphere_saddle(m: &SharedManifold) -> SharedObjective {
    Arc::new(Quadratic::new(vec![1.0, -1.0, 4.0], m.clone()).unwrap())
}

#[test]
fn two_step_vanishes_when_either_leg_is_zero() {
    let m = s2();
    let x = p(&m, &[1.0, 0.0, 0.0]);
    let a = t(&m, &x, &[0.0, 0.3, -0.1]);
    let zero = Tangent::zero(&x);
    assert_eq!(two_step_residual(&*m, &x, &zero, &a).unwrap(), 0.0);
    assert!(two_step_residual(&*m, &x, &a, &zero).unwrap() <= 1e-15);
}

#[test]
fn log_pair_identities() {
    let m = s2();
    let x = p(&m, &[1.0, 0.0, 0.0]);
    let y = m.exp(&x, &t(&m, &x, &[0.0, 0.3, 0.0])).unwrap();
    let z = m.exp(&x, &t(&m, &x, &[0.0, 0.7, 0.0])).unwrap();
    assert_eq!(log_pair(&*m, &x, &y, &y).unwrap(), (0.0, 0.0));
    let (l, d) = log_pair(&*m, &x, &y, &z).unwrap();
    assert!((l - 0.4).abs() < 1e-12 && (d - 0.4).abs() < 1e-12);
}

#[test]
fn contraction_degenerate_cases() {
    let m = s2();
    let x = p(&m, &[0.0, 0.6, 0.8]);
    let w = t(&m, &x, &[0.5, 0.0, 0.0]);
    let zero = Tangent::zero(&x);
    assert_eq!(contraction_residual(&*m, &x, &zero, &w).unwrap(), 0.0);
    let v = t(&m, &x, &[0.0, 0.8 * 0.2, -0.6 * 0.2]);
    let r = contraction_residual(&*m, &x, &v, &zero).unwrap();
    assert!((r - 0.2).abs() < 1e-12);
}

#[test]
fn holonomy_oracles() {
    let m = s2();
    let x = p(&m, &[1.0, 0.0, 0.0]);
    // Octant triangle: composed by hand, e3 at x ends at −e2 via y and at −e1 directly.
    let y = p(&m, &[0.0, 1.0, 0.0]);
    let z = p(&m, &[0.0, 0.0, 1.0]);
    let w = t(&m, &x, &[0.0, 0.0, 1.0]);
    let r = holonomy_residual(&*m, &x, &y, &z, &w).unwrap();
    assert!((r - SQRT_2).abs() < 1e-12);
    assert!((r / (FRAC_PI_2 * FRAC_PI_2) - 0.5732).abs() < 1e-4);
    // Collinear: all three on the equator through x.
    let y = m.exp(&x, &t(&m, &x, &[0.0, 0.4, 0.0])).unwrap();
    let z = m.exp(&x, &t(&m, &x, &[0.0, 1.1, 0.0])).unwrap();
    let w = t(&m, &x, &[0.0, 0.3, 0.9]);
    assert!(holonomy_residual(&*m, &x, &y, &z, &w).unwrap() <= 1e-10);
}

#[test]
fn sphere_suite_passes_and_falsified_suite_fails() {
    let m = s2();
    let q = sphere_saddle(&m);
    let x = p(&m, &[1.0, 0.0, 0.0]);
    for control in [Control::Nominal, Control::Falsified] {
        let want = control == Control::Nominal;
        let two = check_two_step(&*m, 300, &SCALES, &mut seeded(2), control).unwrap();
        let bil = check_log_bilipschitz(&*m, 300, &[0.5, 0.25, 0.125, 0.0625], &mut seeded(2), control).unwrap();
        let hol = check_holonomy(&*m, 300, &SCALES, &mut seeded(2), control).unwrap();
        let con = check_transport_contraction(&*m, 300, &SCALES, &mut seeded(2), control).unwrap();
        let tay = check_gradient_taylor(&*q, 300, &SCALES, &mut seeded(2), control).unwrap();
        for r in [&two, &bil, &hol, &con, &tay] {
            assert_eq!(r.pass, want, "{}", r.to_text());
        }
        let lin = check_linearization(&*q, &x, 300, &[1e-1, 1e-2, 1e-3, 1e-4], 0.05, &mut seeded(2), control).unwrap();
        assert!(!lin.pass || want);
    }
}

#[test]
fn contraction_constant_on_the_sphere() {
    let m = s2();
    let r = check_transport_contraction(&*m, 500, &SCALES, &mut seeded(5), Control::Nominal).unwrap();
    let c4: f64 = r.note("c4_max").unwrap().parse().unwrap();
    assert!(c4 <= 1.05, "c4 = {c4}");
}

#[test]
fn linearization_is_exact_in_flat_space() {
    let e: SharedManifold = Arc::new(Euclidean::new(3).unwrap());
    let q = sphere_saddle(&e);
    let x = p(&e, &[0.0, 0.0, 0.0]);
    let r = check_linearization(&*q, &x, 200, &[1.0, 0.1, 0.01], 0.05, &mut seeded(0), Control::Nominal).unwrap();
    assert!(r.max_residual_per_scale.iter().all(|v| *v <= 1e-10));
    assert!(r.pass);
    assert_eq!(linearization_residual(&*q, &x, &x, &x, 0.05).unwrap(), 0.0);
}

#[test]
fn linearization_needs_exact_hessian() {
    // A Stiefel kPCA objective only has finite-difference Hessians.
    let m: SharedManifold = Arc::new(Stiefel::new(4, 2).unwrap());
    let h = prgd::linalg::Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 2.0, 3.0]));
    let obj = prgd::objective::Kpca::new(h, m.clone()).unwrap();
    let x = m.point(prgd::linalg::Mat::identity(4, 2)).unwrap();
    let err = check_linearization(&obj, &x, 10, &SCALES, 0.05, &mut seeded(0), Control::Nominal).unwrap_err();
    assert!(matches!(err, Error::Capability { .. }));
}

#[test]
fn gradient_taylor_trivial_cases() {
    let e: SharedManifold = Arc::new(Euclidean::new(3).unwrap());
    let lin = Linear::new(column(&[1.0, -2.0, 0.5]), e.clone()).unwrap();
    let r = check_gradient_taylor(&lin, 100, &SCALES, &mut seeded(0), Control::Nominal).unwrap();
    assert!(r.max_residual_per_scale.iter().all(|v| *v == 0.0));
    let m = s2();
    let q = sphere_saddle(&m);
    let x = p(&m, &[0.0, 0.6, 0.8]);
    assert_eq!(gradient_taylor_residual(&*q, &x, &Tangent::zero(&x)).unwrap(), 0.0);
}

#[test]
fn descent_on_constant_objective() {
    let m = s2();
    let zero = Quadratic::new(vec![0.0; 3], m.clone()).unwrap();
    let r = check_descent(&zero, &Region::Global, 200, 0.1, &mut seeded(0), Control::Nominal).unwrap();
    assert!(r.pass);
    assert_eq!(r.max_residual_per_scale, vec![0.0]);
}

#[test]
fn descent_respects_step_size() {
    let m = s2();
    let q = sphere_saddle(&m);
    let beta_hat = 10.0;
    let ok = check_descent(
        &*q,
        &Region::Global,
        1000,
        0.9 / beta_hat,
        &mut seeded(1),
        Control::Nominal,
    )
    .unwrap();
    assert!(ok.pass && ok.violations == 0);
    let bad = check_descent(
        &*q,
        &Region::Global,
        1000,
        10.0 / beta_hat,
        &mut seeded(1),
        Control::Nominal,
    )
    .unwrap();
    assert!(!bad.pass && bad.violations > 0);
    let ball = Region::Ball {
        center: p(&m, &[1.0, 0.0, 0.0]),
        radius: 0.3,
    };
    assert!(
        check_descent(&*q, &ball, 200, 0.09, &mut seeded(1), Control::Nominal)
            .unwrap()
            .pass
    );
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let m = s2();
    let run = || check_holonomy(&*m, 200, &SCALES, &mut seeded(9), Control::Nominal).unwrap();
    let many = run();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(many, one);
    assert_eq!(VerificationReport::from_text(&many.to_text()).unwrap(), many);
}

#[test]
fn invalid_inputs() {
    let m = s2();
    assert!(check_two_step(&*m, 10, &[0.1, 0.2], &mut seeded(0), Control::Nominal).is_err());
    assert!(matches!(
        check_two_step(&*m, 10, &[1.0, 0.5], &mut seeded(0), Control::Nominal),
        Err(Error::Domain { .. })
    ));
    let st: SharedManifold = Arc::new(Stiefel::new(4, 2).unwrap());
    assert!(matches!(
        check_two_step(&*st, 10, &SCALES, &mut seeded(0), Control::Nominal),
        Err(Error::Capability { .. })
    ));
}

fn probe_thresholds() -> prgd::optimizer::ThresholdSet {
    let params = AssumptionParams {
        beta: 10.0,
        rho: 10.0,
        curvature_k: 1.0,
        injectivity: std::f64::consts::PI,
        epsilon: 1e-4,
        delta: 0.1,
        f_gap: 5.0,
        dim_d: 2,
        rho_hat: 10.0,
    };
    let o = PracticalOverrides {
        eta: Some(0.05),
        r: Some(1e-3),
        ..Default::default()
    };
    practical_thresholds(&params, 4.0, &o).unwrap().thresholds
}

#[test]
fn coupling_growth_matches_curvature() {
    let m = s2();
    let q = sphere_saddle(&m);
    let x = p(&m, &[1.0, 0.0, 0.0]);
    let thr = probe_thresholds();
    let rep = coupling_probe(&*q, &x, &thr, 1.0, 300, &mut seeded(4)).unwrap();
    assert!(rep.pass);
    assert!((rep.lambda_min + 4.0).abs() < 1e-8);
    assert!((rep.ratios[0] - rep.predicted_ratio()).abs() < 1e-3);
    assert!(rep.escaped_at.is_some() && rep.tenfold_at.is_some());

    let still = coupling_probe(&*q, &x, &thr, 0.0, 50, &mut seeded(4)).unwrap();
    assert!(still.psi.iter().all(|v| *v == 0.0));
    assert!(!still.pass);

    let min = p(&m, &[0.0, 1.0, 0.0]);
    assert!(coupling_probe(&*q, &min, &thr, 1.0, 50, &mut seeded(4)).is_err());
}

#[test]
fn registry_runs_by_id() {
    let reg = CheckRegistry::with_builtins();
    assert_eq!(reg.ids().len(), 8);
    let m = s2();
    let ctx = CheckContext {
        manifold: m.clone(),
        objective: Some(sphere_saddle(&m)),
        saddle: Some(p(&m, &[1.0, 0.0, 0.0])),
        thresholds: Some(probe_thresholds()),
        n_samples: 100,
        scales: SCALES.to_vec(),
        radii: vec![0.5, 0.25, 0.125],
        eta: 0.05,
        mu: 1.0,
        t_max: 200,
        seed: 3,
        control: Control::Nominal,
    };
    for id in ["two-step", "holonomy", "coupling", "descent"] {
        assert!(reg.run(id, &ctx).unwrap().pass(), "{id}");
    }
    assert!(reg.run("nope", &ctx).is_err());
    let bare = CheckContext { objective: None, ..ctx };
    assert!(reg.run("descent", &bare).is_err());
}
