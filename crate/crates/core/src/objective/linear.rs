use super::Objective;
use crate::error::{Error, Result};
use crate::linalg::{frob_inner, Mat};
use crate::manifold::SharedManifold;

/// `f(x) = ⟨c, x⟩`; its Hessian is zero on flat space and `−⟨x, c⟩ I` on the sphere.
#[derive(Clone, Debug)]
pub struct Linear {
    c: Mat,
    manifold: SharedManifold,
}

impl Linear {
    pub fn new(c: Mat, manifold: SharedManifold) -> Result<Self> {
        if c.shape() != manifold.shape() {
            return Err(Error::invalid(format!(
                "coefficient shape {:?} does not match {}",
                c.shape(),
                manifold.id()
            )));
        }
        Ok(Linear { c, manifold })
    }
}

impl Objective for Linear {
    fn kind(&self) -> &'static str {
        "linear"
    }

    fn manifold(&self) -> &SharedManifold {
        &self.manifold
    }

    fn value_coords(&self, x: &Mat) -> f64 {
        frob_inner(&self.c, x)
    }

    fn egrad_coords(&self, _x: &Mat) -> Mat {
        self.c.clone()
    }

    fn exact_hess_coords(&self, x: &Mat, v: &Mat) -> Option<Mat> {
        match self.manifold.kind() {
            "euclidean" => Some(Mat::zeros(v.nrows(), v.ncols())),
            "sphere" => Some(v * (-frob_inner(x, &self.c))),
            _ => None,
        }
    }

    fn has_exact_hessian(&self) -> bool {
        matches!(self.manifold.kind(), "euclidean" | "sphere")
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        match self.manifold.kind() {
            "euclidean" => Some(0.0),
            _ => Some(self.c.norm()),
        }
    }
}
