use std::fmt;
use std::time::Duration;

use crate::manifold::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// The escape test failed after a perturbation: approximate local minimum.
    SecondOrderPoint,
    /// Baseline gradient descent reached its gradient tolerance.
    FirstOrderPoint,
    IterationCap,
    StepFailure,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::SecondOrderPoint => "second-order-point",
            RunStatus::FirstOrderPoint => "first-order-point",
            RunStatus::IterationCap => "iteration-cap",
            RunStatus::StepFailure => "step-failure",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One pass of the main loop.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    /// `f(x_t)` after any perturbation applied in this pass.
    pub f: f64,
    pub gradnorm: f64,
    /// Geodesic length of the gradient step taken in this pass.
    pub step_norm: f64,
    pub perturbed: bool,
    /// Distance to the iterate saved at the last perturbation.
    pub dist_to_anchor: Option<f64>,
    pub dist_to_start: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceTerminal {
    pub status: RunStatus,
    pub total_iterations: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub terminal: Option<TraceTerminal>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub status: RunStatus,
    pub final_point: Point,
    pub final_f: f64,
    pub final_gradnorm: f64,
    pub final_lambda_min: Option<f64>,
    pub iterations: u64,
    pub trace: Trace,
    /// Kept out of the trace so identical seeds give identical traces.
    pub wall_time: Duration,
    pub message: Option<String>,
}
