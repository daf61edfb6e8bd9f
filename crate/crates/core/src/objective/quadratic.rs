use super::Objective;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::SharedManifold;

/// `f(x) = xᵀ D x` with diagonal `D`, on the unit sphere or on flat space.
#[derive(Clone, Debug)]
pub struct Quadratic {
    diag: Vec<f64>,
    manifold: SharedManifold,
    on_sphere: bool,
}

impl Quadratic {
    pub fn new(diag: Vec<f64>, manifold: SharedManifold) -> Result<Self> {
        let on_sphere = match manifold.kind() {
            "sphere" => true,
            "euclidean" => false,
            other => {
                return Err(Error::invalid(format!(
                    "quadratic objective needs a sphere or euclidean manifold, got {other}"
                )))
            }
        };
        if manifold.shape() != (diag.len(), 1) {
            return Err(Error::invalid(format!(
                "diagonal has {} entries but {} has shape {:?}",
                diag.len(),
                manifold.id(),
                manifold.shape()
            )));
        }
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("diagonal entries must be finite"));
        }
        Ok(Quadratic {
            diag,
            manifold,
            on_sphere,
        })
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    fn apply(&self, v: &Mat) -> Mat {
        Mat::from_fn(v.nrows(), 1, |i, _| self.diag[i] * v[(i, 0)])
    }
}

impl Objective for Quadratic {
    fn kind(&self) -> &'static str {
        "sphere-quadratic"
    }

    fn manifold(&self) -> &SharedManifold {
        &self.manifold
    }

    fn value_coords(&self, x: &Mat) -> f64 {
        x.iter().zip(&self.diag).map(|(xi, d)| d * xi * xi).sum()
    }

    fn egrad_coords(&self, x: &Mat) -> Mat {
        self.apply(x) * 2.0
    }

    /// Sphere: `2 P(D − (xᵀDx) I) v`; flat space: `2 D v`.
    fn exact_hess_coords(&self, x: &Mat, v: &Mat) -> Option<Mat> {
        if !self.on_sphere {
            return Some(self.apply(v) * 2.0);
        }
        let shift = self.value_coords(x);
        let raw = (self.apply(v) - v * shift) * 2.0;
        Some(&raw - x * x.dot(&raw))
    }

    fn has_exact_hessian(&self) -> bool {
        true
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        let max = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.diag.iter().copied().fold(f64::INFINITY, f64::min);
        if self.on_sphere {
            Some(2.0 * (max - min))
        } else {
            Some(2.0 * max.abs().max(min.abs()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::column;
    use crate::manifold::Sphere;
    use std::sync::Arc;

    fn sphere_saddle() -> Quadratic {
        Quadratic::new(vec![1.0, -1.0, 4.0], Arc::new(Sphere::new(3).unwrap())).unwrap()
    }

    #[test]
    fn value_at_saddle() {
        let f = sphere_saddle();
        let x = f.manifold().point(column(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.value(&x).unwrap(), 1.0);
    }

    #[test]
    fn gradient_vanishes_at_eigenvector() {
        let f = sphere_saddle();
        let x = f.manifold().point(column(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.rgrad(&x).unwrap().norm(), 0.0);
    }

    #[test]
    fn exact_hessian_spectrum_at_saddle() {
        let f = sphere_saddle();
        let m = f.manifold().clone();
        let x = m.point(column(&[1.0, 0.0, 0.0])).unwrap();
        let e2 = m.tangent(&x, column(&[0.0, 1.0, 0.0])).unwrap();
        let e3 = m.tangent(&x, column(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(f.exact_hess_vec(&x, &e2).unwrap().coords(), &column(&[0.0, -4.0, 0.0]));
        assert_eq!(f.exact_hess_vec(&x, &e3).unwrap().coords(), &column(&[0.0, 0.0, 6.0]));
    }

    #[test]
    fn dimension_mismatch() {
        let err = Quadratic::new(vec![1.0, 2.0], Arc::new(Sphere::new(3).unwrap()));
        assert!(err.is_err());
    }
}
