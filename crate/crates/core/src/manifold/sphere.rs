use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::sphere_kernels as k;
use super::{GeometryInfo, Manifold, ManifoldId};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Unit sphere `S^{n−1} ⊂ ℝⁿ`, points stored as `n × 1` columns.
#[derive(Clone, Debug)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("sphere needs ambient dimension ≥ 2, got {n}")));
        }
        Ok(Sphere { n })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }
}

fn col(m: &Mat) -> &[f64] {
    m.as_slice()
}

fn to_mat(v: Vec<f64>) -> Mat {
    let n = v.len();
    Mat::from_vec(n, 1, v)
}

impl Manifold for Sphere {
    fn id(&self) -> ManifoldId {
        ManifoldId::new(format!("sphere({})", self.n))
    }

    fn kind(&self) -> &'static str {
        "sphere"
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, 1)
    }

    fn geometry(&self) -> GeometryInfo {
        GeometryInfo {
            curvature_bound: 1.0,
            injectivity_radius: PI,
            dimension: self.n - 1,
        }
    }

    fn feasibility_residual(&self, x: &Mat) -> f64 {
        (x.norm() - 1.0).abs()
    }

    fn tangency_residual(&self, x: &Mat, v: &Mat) -> f64 {
        x.dot(v).abs()
    }

    fn normalize_coords(&self, x: Mat) -> Mat {
        let n = x.norm();
        x / n
    }

    fn project_coords(&self, x: &Mat, a: &Mat) -> Mat {
        to_mat(k::project(col(x), col(a)))
    }

    fn exp_coords(&self, x: &Mat, v: &Mat) -> Mat {
        to_mat(k::exp(col(x), col(v)))
    }

    fn log_coords(&self, x: &Mat, y: &Mat) -> Result<Mat> {
        k::log(col(x), col(y))
            .map(to_mat)
            .ok_or_else(|| Error::domain("points are antipodal on the sphere", PI))
    }

    fn dist_coords(&self, x: &Mat, y: &Mat) -> Result<f64> {
        Ok(k::dist(col(x), col(y)))
    }

    fn transport_along_coords(&self, x: &Mat, v: &Mat, w: &Mat) -> Mat {
        to_mat(k::transport_along(col(x), col(v), col(w)))
    }

    fn random_coords(&self, rng: &mut dyn RngCore) -> Mat {
        loop {
            let g = Mat::from_fn(self.n, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
            let n = g.norm();
            if n > 1e-8 {
                return g / n;
            }
        }
    }
}
