use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::report::fmt_f64;
use super::{assemble, check_n, check_scales, sweep, unit_tangent, Control, Sample, Scaling, VerificationReport};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, Tangent};
use crate::objective::{hess_vec_default, Objective};
use crate::rng::substream;

/// Where sample points are drawn from.
#[derive(Clone, Debug)]
pub enum Region {
    /// The manifold's own random-point distribution.
    Global,
    /// Uniform tangent ball around `center`, mapped through the exponential map.
    Ball { center: Point, radius: f64 },
}

impl Region {
    fn sample(&self, m: &dyn Manifold, rng: &mut dyn RngCore) -> Result<Point> {
        match self {
            Region::Global => Ok(m.random_point(rng)),
            Region::Ball { center, radius } => {
                let v = m.sample_tangent_ball(center, *radius, rng)?;
                m.exp(center, &v)
            }
        }
    }
}

fn clamped_eta(eta: f64, gradnorm: f64, inj: f64) -> f64 {
    if gradnorm > 0.0 && inj.is_finite() {
        eta.min(inj / gradnorm)
    } else {
        eta
    }
}

/// One gradient step `Exp_u(−η̄·grad f(u))` with `η̄ = min{η, 𝕴/‖grad f(u)‖}`.
fn gradient_step(obj: &dyn Objective, u: &Point, eta: f64) -> Result<(Point, f64, f64)> {
    let m = obj.manifold();
    let g = obj.rgrad(u)?;
    let gn = g.norm();
    let eta_bar = clamped_eta(eta, gn, m.geometry().injectivity_radius);
    Ok((m.exp(u, &g.scale(-eta_bar))?, gn, eta_bar))
}

/// Sufficient decrease of one gradient step:
/// `f(u⁺) ≤ f(u) − ½·η̄·‖grad f(u)‖²` at every sample, up to `1e−12`.
///
/// The single scale is `eta`; its residual is the largest excess over the
/// bound. `fitted_constant` is the smallest observed `(f(u)−f(u⁺))/(η̄‖g‖²)`.
/// Falsified, the demanded decrease is `½·η̄·‖grad f(u)‖`.
pub fn check_descent(
    obj: &dyn Objective,
    region: &Region,
    n: usize,
    eta: f64,
    rng: &mut dyn RngCore,
    control: Control,
) -> Result<VerificationReport> {
    check_n(n)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::invalid(format!("step size must be positive, got {eta}")));
    }
    let m = obj.manifold();
    let seed = rng.next_u64();
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = substream(seed, i as u64);
            let u = region.sample(&**m, &mut r)?;
            let f0 = obj.value(&u)?;
            let (next, gn, eta_bar) = gradient_step(obj, &u, eta)?;
            let f1 = obj.value(&next)?;
            let power = if control == Control::Falsified { 1 } else { 2 };
            let excess = f1 - (f0 - 0.5 * eta_bar * gn.powi(power));
            let ratio = if gn > 0.0 {
                (f0 - f1) / (eta_bar * gn * gn)
            } else {
                f64::INFINITY
            };
            Ok((excess, ratio))
        })
        .collect::<Result<_>>()?;
    let violations = rows.iter().filter(|(e, _)| !(*e <= 1e-12)).count();
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let fitted = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(VerificationReport {
        lemma_id: "descent".into(),
        n_samples: n,
        scales: vec![eta],
        max_residual_per_scale: vec![worst],
        fitted_slope: None,
        slope_window: None,
        fitted_constant: if fitted.is_finite() { fitted } else { 0.0 },
        violations,
        pass: violations == 0,
        notes: vec![("control".into(), format!("{control:?}").to_lowercase())],
    })
}

/// `‖Exp_x⁻¹(w⁺) − Exp_x⁻¹(u⁺) − (I − ηH(x))(Exp_x⁻¹(w) − Exp_x⁻¹(u))‖`
/// with `u⁺`, `w⁺` one gradient step from `u`, `w`.
pub fn linearization_residual(obj: &dyn Objective, x: &Point, u: &Point, w: &Point, eta: f64) -> Result<f64> {
    let m = obj.manifold();
    let (u1, _, _) = gradient_step(obj, u, eta)?;
    let (w1, _, _) = gradient_step(obj, w, eta)?;
    let delta = m.log(x, w)?.lin_comb(1.0, &m.log(x, u)?, -1.0);
    let h = obj.exact_hess_vec(x, &delta)?;
    let predicted = delta.lin_comb(1.0, &h, -eta);
    let actual = m.log(x, &w1)?.lin_comb(1.0, &m.log(x, &u1)?, -1.0);
    Ok(actual.lin_comb(1.0, &predicted, -1.0).norm())
}

/// Linearised gradient map near a stationary point `x`: the residual is at most
/// `C·d(u,w)·(d(u,w)+d(u,x)+d(w,x))`, and `residual/d(u,w)` decays linearly.
/// `max_residual_per_scale` holds that normalised residual.
pub fn check_linearization(
    obj: &dyn Objective,
    saddle_x: &Point,
    n: usize,
    scales: &[f64],
    eta: f64,
    rng: &mut dyn RngCore,
    control: Control,
) -> Result<VerificationReport> {
    check_n(n)?;
    check_scales(scales)?;
    let m = obj.manifold();
    m.check_point(saddle_x)?;
    if !obj.has_exact_hessian() {
        return Err(Error::capability(
            format!("{} objective", obj.kind()),
            "an exact Hessian",
        ));
    }
    let seed = rng.next_u64();
    let data = sweep(n, scales.len(), seed, |r| {
        let du = unit_tangent(&**m, saddle_x, r)?;
        let dw = unit_tangent(&**m, saddle_x, r)?;
        let (a, b): (f64, f64) = (r.gen_range(0.25..1.0), r.gen_range(0.25..1.0));
        scales
            .iter()
            .map(|s| {
                let u = m.exp(saddle_x, &du.scale(s * a))?;
                let w = m.exp(saddle_x, &dw.scale(s * b))?;
                let res = linearization_residual(obj, saddle_x, &u, &w, eta)?;
                let duw = m.dist(&u, &w)?;
                let bound = duw * (duw + m.dist(&u, saddle_x)? + m.dist(&w, saddle_x)?);
                let mut sample = Sample::new(res, bound);
                sample.decay = if duw > 0.0 { res / duw } else { 0.0 };
                Ok(sample)
            })
            .collect()
    })?;
    Ok(assemble(
        Scaling {
            lemma_id: "linearization",
            scales,
            exponent: Some(1.0),
            control,
        },
        data,
    ))
}

/// `‖Γ_z^x grad f(z) − grad f(x) − H(x)[v]‖` with `z = Exp_x(v)`. Uses the
/// exact Hessian when the objective has one.
pub fn gradient_taylor_residual(obj: &dyn Objective, x: &Point, v: &Tangent) -> Result<f64> {
    let m = obj.manifold();
    let z = m.exp(x, v)?;
    let back = m.transport(&z, x, &obj.rgrad(&z)?)?;
    let h = if obj.has_exact_hessian() {
        obj.exact_hess_vec(x, v)?
    } else {
        hess_vec_default(obj, x, v)?
    };
    let g = obj.rgrad(x)?;
    Ok(back.lin_comb(1.0, &g, -1.0).lin_comb(1.0, &h, -1.0).norm())
}

/// Gradient Taylor expansion: the remainder is at most `½·ρ̂·d(x,z)²` and
/// decays quadratically. Reports the fitted `rho_hat = 2·fitted_constant`.
pub fn check_gradient_taylor(
    obj: &dyn Objective,
    n: usize,
    scales: &[f64],
    rng: &mut dyn RngCore,
    control: Control,
) -> Result<VerificationReport> {
    check_n(n)?;
    check_scales(scales)?;
    let m = obj.manifold();
    let inj = m.geometry().injectivity_radius;
    if scales[0] >= 0.5 * inj {
        return Err(Error::domain(
            "largest scale is not well inside the injectivity radius",
            inj,
        ));
    }
    let seed = rng.next_u64();
    let data = sweep(n, scales.len(), seed, |r| {
        let x = m.random_point(r);
        let u = unit_tangent(&**m, &x, r)?;
        scales
            .iter()
            .map(|s| Ok(Sample::new(gradient_taylor_residual(obj, &x, &u.scale(*s))?, s * s)))
            .collect()
    })?;
    let mut rep = assemble(
        Scaling {
            lemma_id: "gradient-taylor",
            scales,
            exponent: Some(2.0),
            control,
        },
        data,
    );
    rep.notes.push(("rho_hat".into(), fmt_f64(2.0 * rep.fitted_constant)));
    Ok(rep)
}
