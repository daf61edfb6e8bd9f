use std::time::Instant;

use rand::RngCore;

use super::params::ThresholdSet;
use super::trace::{RunResult, RunStatus, Trace, TraceRow, TraceTerminal};
use crate::error::Result;
use crate::manifold::{Point, Tangent};
use crate::objective::Objective;

/// Loop state of the perturbed method.
#[derive(Clone, Debug)]
pub struct OptState {
    pub t: u64,
    pub x: Point,
    /// Time of the last perturbation; starts at `−t_thres − 1`.
    pub t_noise: i64,
    /// Iterate saved at the last perturbation and its value.
    pub x_tilde: Option<(Point, f64)>,
    pub x0: Point,
    pub trace: Trace,
}

impl OptState {
    pub fn new(x0: Point, thr: &ThresholdSet) -> Self {
        OptState {
            t: 0,
            x: x0.clone(),
            t_noise: -(thr.t_thres as i64) - 1,
            x_tilde: None,
            x0,
            trace: Trace::default(),
        }
    }

    fn since_noise(&self) -> i64 {
        self.t as i64 - self.t_noise
    }
}

#[derive(Debug)]
pub enum StepOutcome {
    Continue(OptState),
    Terminated(RunResult),
}

/// Gradient step `−min{η, 𝕴/‖g‖}·g`; zero when the gradient vanishes.
pub(crate) fn clamped_step(grad: &Tangent, gradnorm: f64, eta: f64, injectivity: f64) -> Tangent {
    if gradnorm == 0.0 {
        return grad.scale(0.0);
    }
    let len = if injectivity.is_finite() {
        eta.min(injectivity / gradnorm)
    } else {
        eta
    };
    grad.scale(-len)
}

fn finish(mut state: OptState, status: RunStatus, point: Point, f: f64, g: f64, message: Option<String>) -> RunResult {
    state.trace.terminal = Some(TraceTerminal {
        status,
        total_iterations: state.t,
    });
    RunResult {
        status,
        final_point: point,
        final_f: f,
        final_gradnorm: g,
        final_lambda_min: None,
        iterations: state.t,
        trace: state.trace,
        wall_time: Default::default(),
        message,
    }
}

fn failure(state: OptState, why: String) -> StepOutcome {
    let x = state.x.clone();
    StepOutcome::Terminated(finish(state, RunStatus::StepFailure, x, f64::NAN, f64::NAN, Some(why)))
}

/// One pass of the main loop:
/// 1. small gradient and no pending window: save `x̃`, perturb within the ball of radius `r`;
/// 2. window closed without an `f_thres` decrease: stop and return `x̃`;
/// 3. clamped gradient step;
/// 4. `t ← t+1`.
pub fn prgd_step(mut state: OptState, thr: &ThresholdSet, obj: &dyn Objective, rng: &mut dyn RngCore) -> StepOutcome {
    let m = obj.manifold().clone();
    let eval = |x: &Point| -> Result<(f64, Tangent, f64)> {
        let f = obj.value(x)?;
        let g = obj.rgrad(x)?;
        let n = g.norm();
        Ok((f, g, n))
    };
    let (mut f, mut grad, mut gn) = match eval(&state.x) {
        Ok(v) => v,
        Err(e) => return failure(state, e.to_string()),
    };
    if !f.is_finite() || !gn.is_finite() {
        let why = format!("non-finite value {f} or gradient norm {gn} at t = {}", state.t);
        return failure(state, why);
    }

    let mut perturbed = false;
    if gn <= thr.g_thres && state.since_noise() > thr.t_thres as i64 {
        state.t_noise = state.t as i64;
        state.x_tilde = Some((state.x.clone(), f));
        let moved = m
            .sample_tangent_ball(&state.x, thr.r, rng)
            .and_then(|xi| m.exp(&state.x, &xi));
        match moved {
            Ok(x) => state.x = x,
            Err(e) => return failure(state, e.to_string()),
        }
        perturbed = true;
        match eval(&state.x) {
            Ok((f2, g2, n2)) if f2.is_finite() && n2.is_finite() => {
                f = f2;
                grad = g2;
                gn = n2;
            }
            Ok((f2, _, n2)) => {
                return failure(
                    state,
                    format!("non-finite value {f2} or gradient norm {n2} after perturbation"),
                )
            }
            Err(e) => return failure(state, e.to_string()),
        }
    }

    if state.since_noise() == thr.t_thres as i64 {
        if let Some((tilde, f_tilde)) = state.x_tilde.clone() {
            if f - f_tilde > -thr.f_thres {
                let g_tilde = obj.rgrad(&tilde).map(|g| g.norm()).unwrap_or(f64::NAN);
                return StepOutcome::Terminated(finish(
                    state,
                    RunStatus::SecondOrderPoint,
                    tilde,
                    f_tilde,
                    g_tilde,
                    None,
                ));
            }
        }
    }

    let step = clamped_step(&grad, gn, thr.eta, thr.injectivity);
    let next = match m.exp(&state.x, &step) {
        Ok(p) if p.coords().iter().all(|c| c.is_finite()) => p,
        Ok(_) => {
            let why = format!("non-finite iterate after step at t = {}", state.t);
            return failure(state, why);
        }
        Err(e) => return failure(state, e.to_string()),
    };

    let dist_to_anchor = state.x_tilde.as_ref().and_then(|(p, _)| m.dist(&state.x, p).ok());
    let dist_to_start = m.dist(&state.x, &state.x0).ok();
    state.trace.rows.push(TraceRow {
        t: state.t,
        f,
        gradnorm: gn,
        step_norm: step.norm(),
        perturbed,
        dist_to_anchor,
        dist_to_start,
    });
    state.x = next;
    state.t += 1;
    StepOutcome::Continue(state)
}

/// Iterate [`prgd_step`] until it terminates or `max_iters` passes have run.
pub fn run(
    obj: &dyn Objective,
    x0: &Point,
    thr: &ThresholdSet,
    max_iters: u64,
    rng: &mut dyn RngCore,
) -> Result<RunResult> {
    obj.manifold().check_point(x0)?;
    let start = Instant::now();
    let mut state = OptState::new(x0.clone(), thr);
    loop {
        if state.t >= max_iters {
            let x = state.x.clone();
            let f = obj.value(&x)?;
            let g = obj.rgrad(&x)?.norm();
            let mut res = finish(state, RunStatus::IterationCap, x, f, g, None);
            res.wall_time = start.elapsed();
            return Ok(res);
        }
        match prgd_step(state, thr, obj, rng) {
            StepOutcome::Continue(s) => state = s,
            StepOutcome::Terminated(mut res) => {
                res.wall_time = start.elapsed();
                return Ok(res);
            }
        }
    }
}
