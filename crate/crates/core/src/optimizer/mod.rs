//! Perturbed Riemannian gradient descent as an explicit state machine, a plain
//! Riemannian gradient descent baseline, and the stationarity classifier.

mod baseline;
mod classify;
mod params;
mod prgd;
mod trace;

pub use baseline::rgd_baseline;
pub use classify::{classify_stationarity, Stationarity};
pub use params::{
    derive_thresholds, epsilon_bound, practical_thresholds, AssumptionParams, Derivation, EpsilonBound, Mode,
    PracticalOverrides, ThresholdSet,
};
pub use prgd::{prgd_step, run, OptState, StepOutcome};
pub use trace::{RunResult, RunStatus, Trace, TraceRow, TraceTerminal};
