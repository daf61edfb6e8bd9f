use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{GeometryInfo, Manifold, ManifoldId};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Flat `ℝⁿ` as `n × 1` columns; the zero-curvature baseline.
#[derive(Clone, Debug)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("euclidean dimension must be positive"));
        }
        Ok(Euclidean { n })
    }
}

impl Manifold for Euclidean {
    fn id(&self) -> ManifoldId {
        ManifoldId::new(format!("euclidean({})", self.n))
    }

    fn kind(&self) -> &'static str {
        "euclidean"
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, 1)
    }

    fn geometry(&self) -> GeometryInfo {
        GeometryInfo {
            curvature_bound: 0.0,
            injectivity_radius: f64::INFINITY,
            dimension: self.n,
        }
    }

    fn feasibility_residual(&self, _x: &Mat) -> f64 {
        0.0
    }

    fn tangency_residual(&self, _x: &Mat, _v: &Mat) -> f64 {
        0.0
    }

    fn normalize_coords(&self, x: Mat) -> Mat {
        x
    }

    fn project_coords(&self, _x: &Mat, a: &Mat) -> Mat {
        a.clone()
    }

    fn exp_coords(&self, x: &Mat, v: &Mat) -> Mat {
        x + v
    }

    fn log_coords(&self, x: &Mat, y: &Mat) -> Result<Mat> {
        Ok(y - x)
    }

    fn dist_coords(&self, x: &Mat, y: &Mat) -> Result<f64> {
        Ok((y - x).norm())
    }

    fn transport_along_coords(&self, _x: &Mat, _v: &Mat, w: &Mat) -> Mat {
        w.clone()
    }

    fn random_coords(&self, rng: &mut dyn RngCore) -> Mat {
        Mat::from_fn(self.n, 1, |_, _| rng.sample::<f64, _>(StandardNormal))
    }
}
