use std::sync::Arc;

use prgd::linalg::Mat;
use prgd::manifold::{Euclidean, Grassmann, Manifold, Oblique, Point, SharedManifold, Sphere, Stiefel, Tangent};
use prgd::rng::seeded;
use proptest::prelude::*;
use rand::RngCore;

fn closed_form() -> Vec<SharedManifold> {
    vec![
        Arc::new(Sphere::new(3).unwrap()),
        Arc::new(Sphere::new(6).unwrap()),
        Arc::new(Euclidean::new(4).unwrap()),
        Arc::new(Oblique::new(4, 3).unwrap()),
        Arc::new(Grassmann::new(5, 2).unwrap()),
        Arc::new(Grassmann::new(6, 3).unwrap()),
    ]
}

/// Tangent with Frobenius norm `len` in a random direction.
fn tangent(m: &dyn Manifold, x: &Point, len: f64, rng: &mut dyn RngCore) -> Tangent {
    let v = m.sample_tangent_ball(x, 1.0, rng).unwrap();
    v.scale(len / v.norm())
}

/// Longest tangent whose geodesic stays inside the injectivity domain of every factor.
fn safe_len(m: &dyn Manifold) -> f64 {
    match m.kind() {
        "grassmann" => 1.4,
        "euclidean" => 10.0,
        _ => 3.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_log_round_trip(seed in any::<u64>(), frac in 0.0f64..1.0) {
        for m in closed_form() {
            let mut rng = seeded(seed);
            let x = m.random_point(&mut rng);
            let v = tangent(&*m, &x, frac * safe_len(&*m), &mut rng);
            let y = m.exp(&x, &v).unwrap();
            prop_assert!(m.feasibility_residual(y.coords()) <= 1e-10);
            let back = m.log(&x, &y).unwrap();
            let err = (back.coords() - v.coords()).norm();
            prop_assert!(err <= 1e-7 * (1.0 + v.norm()), "{}: {err}", m.id());
            prop_assert!((back.norm() - m.dist(&x, &y).unwrap()).abs() <= 1e-10);
            let y2 = m.exp(&x, &back).unwrap();
            prop_assert!(m.dist(&y, &y2).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn geodesics_have_constant_speed(seed in any::<u64>(), frac in 0.05f64..1.0, t in 0.1f64..1.0) {
        for m in closed_form() {
            let mut rng = seeded(seed);
            let x = m.random_point(&mut rng);
            let v = tangent(&*m, &x, frac * safe_len(&*m), &mut rng);
            let y = m.exp(&x, &v.scale(t)).unwrap();
            let d = m.dist(&x, &y).unwrap();
            prop_assert!((d - t * v.norm()).abs() <= 1e-9 * (1.0 + v.norm()), "{}", m.id());
        }
    }

    #[test]
    fn transport_is_isometric(seed in any::<u64>(), frac in 0.0f64..1.0) {
        for m in closed_form() {
            let mut rng = seeded(seed);
            let x = m.random_point(&mut rng);
            let v = tangent(&*m, &x, frac * safe_len(&*m), &mut rng);
            let y = m.exp(&x, &v).unwrap();
            let a = tangent(&*m, &x, 1.3, &mut rng);
            let b = tangent(&*m, &x, 0.7, &mut rng);
            let ta = m.transport(&x, &y, &a).unwrap();
            let tb = m.transport(&x, &y, &b).unwrap();
            prop_assert!(m.tangency_residual(y.coords(), ta.coords()) <= 1e-10);
            prop_assert!((ta.norm() - a.norm()).abs() <= 1e-10, "{}", m.id());
            prop_assert!((ta.dot(&tb) - a.dot(&b)).abs() <= 1e-10, "{}", m.id());
        }
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal(seed in any::<u64>()) {
        let mut all = closed_form();
        all.push(Arc::new(Stiefel::new(5, 2).unwrap()));
        for m in all {
            let mut rng = seeded(seed);
            let x = m.random_point(&mut rng);
            let (r, c) = m.shape();
            let a = Mat::from_fn(r, c, |_, _| (rng.next_u32() as f64 / u32::MAX as f64) * 4.0 - 2.0);
            let p = m.project_tangent(&x, &a).unwrap();
            let pp = m.project_tangent(&x, p.coords()).unwrap();
            prop_assert!((pp.coords() - p.coords()).norm() <= 1e-12 * (1.0 + a.norm()), "{}", m.id());
            let t = tangent(&*m, &x, 1.0, &mut rng);
            let resid = &a - p.coords();
            prop_assert!(resid.dot(t.coords()).abs() <= 1e-10 * (1.0 + a.norm()), "{}", m.id());
        }
    }

    #[test]
    fn dist_is_symmetric(seed in any::<u64>()) {
        for m in closed_form() {
            let mut rng = seeded(seed);
            let x = m.random_point(&mut rng);
            let y = m.random_point(&mut rng);
            let (dxy, dyx) = (m.dist(&x, &y).unwrap(), m.dist(&y, &x).unwrap());
            prop_assert!((dxy - dyx).abs() <= 1e-10);
            prop_assert!(m.dist(&x, &x).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn stiefel_geodesics_stay_feasible(seed in any::<u64>(), len in 0.0f64..2.0) {
        let m = Stiefel::new(5, 2).unwrap();
        let mut rng = seeded(seed);
        let x = m.random_point(&mut rng);
        let v = tangent(&m, &x, len, &mut rng);
        let w = tangent(&m, &x, 1.0, &mut rng);
        let (y, tw) = m.transport_along(&x, &v, &w).unwrap();
        prop_assert!(m.feasibility_residual(y.coords()) <= 1e-10);
        prop_assert!(m.tangency_residual(y.coords(), tw.coords()) <= 1e-10);
        prop_assert!((tw.norm() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sphere_matches_great_circle_formulas() {
    let m = Sphere::new(4).unwrap();
    let mut rng = seeded(3);
    for _ in 0..200 {
        let x = m.random_point(&mut rng);
        let y = m.random_point(&mut rng);
        let c = x.coords().dot(y.coords()).clamp(-1.0, 1.0);
        assert!((m.dist(&x, &y).unwrap() - c.acos()).abs() <= 1e-12);
    }
}
