//! Perturbed Riemannian gradient descent on manifolds with closed-form
//! exponential maps, together with the tooling to certify second-order
//! stationarity and to check the local geometry estimates the method relies on.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod manifold;
pub mod objective;
pub mod optimizer;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
