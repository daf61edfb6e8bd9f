//! Cost functions with closed-form Riemannian gradients, plus the
//! second-order machinery built on top of gradients alone: finite-difference
//! Hessian-vector products, a smallest-eigenvalue estimator and empirical
//! smoothness constants.

mod burer_monteiro;
mod hessian;
mod kpca;
mod linear;
mod quadratic;
mod registry;
mod smoothness;

pub use burer_monteiro::BurerMonteiro;
pub use hessian::{
    default_step, hess_vec, hess_vec_default, min_hess_eig, min_hess_eig_with, EigEstimate, EIG_MAX_ITERS,
};
pub use kpca::Kpca;
pub use linear::Linear;
pub use quadratic::Quadratic;
pub use registry::{ObjectiveBuilder, ObjectiveData, ObjectiveRegistry};
pub use smoothness::{estimate_smoothness, SmoothnessEstimate};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::{Point, SharedManifold, Tangent};

pub type SharedObjective = Arc<dyn Objective>;

/// Symmetry tolerance for problem matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub trait Objective: Send + Sync + fmt::Debug {
    /// Registry name, e.g. `"kpca"`.
    fn kind(&self) -> &'static str;

    fn manifold(&self) -> &SharedManifold;

    fn value_coords(&self, x: &Mat) -> f64;

    /// Euclidean gradient in ambient coordinates.
    fn egrad_coords(&self, x: &Mat) -> Mat;

    /// Exact Riemannian Hessian applied to a tangent, when a closed form is known.
    fn exact_hess_coords(&self, _x: &Mat, _v: &Mat) -> Option<Mat> {
        None
    }

    /// A global bound on the gradient Lipschitz constant, when one is cheap.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }

    fn value(&self, x: &Point) -> Result<f64> {
        self.manifold().check_point(x)?;
        Ok(self.value_coords(x.coords()))
    }

    /// Riemannian gradient: the ambient gradient projected onto `T_xM`.
    fn rgrad(&self, x: &Point) -> Result<Tangent> {
        let m = self.manifold();
        m.check_point(x)?;
        m.project_tangent(x, &self.egrad_coords(x.coords()))
    }

    fn has_exact_hessian(&self) -> bool {
        false
    }

    fn exact_hess_vec(&self, x: &Point, v: &Tangent) -> Result<Tangent> {
        let m = self.manifold();
        m.check_tangent_at(x, v)?;
        let h = self
            .exact_hess_coords(x.coords(), v.coords())
            .ok_or_else(|| Error::capability(format!("{} objective", self.kind()), "an exact Hessian"))?;
        m.project_tangent(x, &h)
    }
}

pub(crate) fn check_symmetric(name: &str, m: &Mat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!("{name} must be square, got {:?}", m.shape())));
    }
    let asym = (m - m.transpose()).norm();
    if asym > SYMMETRY_TOL {
        return Err(Error::invalid(format!(
            "{name} is not symmetric: ‖M − Mᵀ‖ = {asym:.3e}"
        )));
    }
    Ok(())
}
