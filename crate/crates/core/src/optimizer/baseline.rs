use std::time::Instant;

use super::prgd::clamped_step;
use super::trace::{RunResult, RunStatus, Trace, TraceRow, TraceTerminal};
use crate::error::Result;
use crate::manifold::Point;
use crate::objective::Objective;

/// Riemannian gradient descent with the same clamped step and no perturbation;
/// stops once `‖grad f‖ ≤ g_tol`.
pub fn rgd_baseline(obj: &dyn Objective, x0: &Point, eta: f64, g_tol: f64, max_iters: u64) -> Result<RunResult> {
    let m = obj.manifold().clone();
    m.check_point(x0)?;
    let start = Instant::now();
    let inj = m.geometry().injectivity_radius;
    let mut trace = Trace::default();
    let mut x = x0.clone();
    let mut t = 0u64;
    let done = |trace: &mut Trace, status, x, f, g, t, message| {
        trace.terminal = Some(TraceTerminal {
            status,
            total_iterations: t,
        });
        RunResult {
            status,
            final_point: x,
            final_f: f,
            final_gradnorm: g,
            final_lambda_min: None,
            iterations: t,
            trace: std::mem::take(trace),
            wall_time: start.elapsed(),
            message,
        }
    };
    loop {
        let f = obj.value(&x)?;
        let grad = obj.rgrad(&x)?;
        let gn = grad.norm();
        if !f.is_finite() || !gn.is_finite() {
            let msg = Some(format!("non-finite value or gradient at t = {t}"));
            return Ok(done(&mut trace, RunStatus::StepFailure, x, f, gn, t, msg));
        }
        if gn <= g_tol {
            return Ok(done(&mut trace, RunStatus::FirstOrderPoint, x, f, gn, t, None));
        }
        if t >= max_iters {
            return Ok(done(&mut trace, RunStatus::IterationCap, x, f, gn, t, None));
        }
        let step = clamped_step(&grad, gn, eta, inj);
        let next = m.exp(&x, &step)?;
        trace.rows.push(TraceRow {
            t,
            f,
            gradnorm: gn,
            step_norm: step.norm(),
            perturbed: false,
            dist_to_anchor: None,
            dist_to_start: m.dist(&x, x0).ok(),
        });
        x = next;
        t += 1;
    }
}
