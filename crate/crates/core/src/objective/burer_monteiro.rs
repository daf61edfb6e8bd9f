use super::{check_symmetric, Objective};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::SharedManifold;

/// `f(Y) = ½ tr(A Y Yᵀ)` on the oblique manifold `diag(YYᵀ) = 1`.
#[derive(Clone, Debug)]
pub struct BurerMonteiro {
    a: Mat,
    manifold: SharedManifold,
}

impl BurerMonteiro {
    pub fn new(a: Mat, manifold: SharedManifold) -> Result<Self> {
        check_symmetric("A", &a)?;
        if manifold.kind() != "oblique" {
            return Err(Error::invalid(format!(
                "burer-monteiro runs on the oblique manifold, got {}",
                manifold.id()
            )));
        }
        if manifold.shape().0 != a.nrows() {
            return Err(Error::invalid(format!(
                "A is {}×{} but {} has {} rows",
                a.nrows(),
                a.ncols(),
                manifold.id(),
                manifold.shape().0
            )));
        }
        Ok(BurerMonteiro { a, manifold })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
}

impl Objective for BurerMonteiro {
    fn kind(&self) -> &'static str {
        "burer-monteiro"
    }

    fn manifold(&self) -> &SharedManifold {
        &self.manifold
    }

    fn value_coords(&self, y: &Mat) -> f64 {
        0.5 * (&self.a * y).component_mul(y).sum()
    }

    fn egrad_coords(&self, y: &Mat) -> Mat {
        &self.a * y
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        let eig = self.a.clone().symmetric_eigen().eigenvalues;
        Some(2.0 * eig.amax())
    }
}
