use super::{check_symmetric, Objective};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::SharedManifold;

/// `f(X) = −½ tr(XᵀHX)` over orthonormal `n × k` frames; minimizers span the
/// top-`k` eigenspace of `H`.
#[derive(Clone, Debug)]
pub struct Kpca {
    h: Mat,
    manifold: SharedManifold,
}

impl Kpca {
    pub fn new(h: Mat, manifold: SharedManifold) -> Result<Self> {
        check_symmetric("H", &h)?;
        if !matches!(manifold.kind(), "grassmann" | "stiefel") {
            return Err(Error::invalid(format!(
                "kpca runs on grassmann or stiefel, got {}",
                manifold.id()
            )));
        }
        if manifold.shape().0 != h.nrows() {
            return Err(Error::invalid(format!(
                "H is {}×{} but {} has {} rows",
                h.nrows(),
                h.ncols(),
                manifold.id(),
                manifold.shape().0
            )));
        }
        Ok(Kpca { h, manifold })
    }

    pub fn h(&self) -> &Mat {
        &self.h
    }

    pub fn k(&self) -> usize {
        self.manifold.shape().1
    }
}

impl Objective for Kpca {
    fn kind(&self) -> &'static str {
        "kpca"
    }

    fn manifold(&self) -> &SharedManifold {
        &self.manifold
    }

    fn value_coords(&self, x: &Mat) -> f64 {
        -0.5 * (x.transpose() * &self.h * x).trace()
    }

    fn egrad_coords(&self, x: &Mat) -> Mat {
        -(&self.h * x)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        let eig = self.h.clone().symmetric_eigen().eigenvalues;
        Some(eig.max() - eig.min())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Grassmann;
    use nalgebra::DVector;
    use std::sync::Arc;

    fn instance() -> Kpca {
        let h = Mat::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0, 3.0, 4.0]));
        Kpca::new(h, Arc::new(Grassmann::new(5, 3).unwrap())).unwrap()
    }

    fn basis(cols: &[usize]) -> Mat {
        let mut m = Mat::zeros(5, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            m[(c - 1, j)] = 1.0;
        }
        m
    }

    #[test]
    fn values_at_coordinate_frames() {
        let f = instance();
        let x0 = f.manifold().point(basis(&[2, 3, 4])).unwrap();
        assert_eq!(f.value(&x0).unwrap(), -3.0);
        let opt = f.manifold().point(basis(&[3, 4, 5])).unwrap();
        assert_eq!(f.value(&opt).unwrap(), -4.5);
    }

    #[test]
    fn coordinate_frames_are_critical() {
        let f = instance();
        let x0 = f.manifold().point(basis(&[2, 3, 4])).unwrap();
        assert_eq!(f.rgrad(&x0).unwrap().norm(), 0.0);
    }

    #[test]
    fn asymmetric_h_is_rejected() {
        let mut h = Mat::identity(5, 5);
        h[(0, 1)] = 1e-6;
        assert!(Kpca::new(h, Arc::new(Grassmann::new(5, 3).unwrap())).is_err());
    }
}
