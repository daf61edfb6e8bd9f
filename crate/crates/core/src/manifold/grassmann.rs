use std::f64::consts::FRAC_PI_2;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{GeometryInfo, Manifold, ManifoldId};
use crate::error::{Error, Result};
use crate::linalg::{orthonormality_residual, orthonormalize, Mat};

/// Grassmann manifold of `k`-planes in `ℝⁿ`, represented by orthonormal
/// `n × k` matrices. Tangents are horizontal lifts (`XᵀV = 0`) at the stored
/// representative.
#[derive(Clone, Debug)]
pub struct Grassmann {
    n: usize,
    k: usize,
    curvature: f64,
    injectivity: f64,
}

/// Thin SVD `V = U Σ Wᵀ`.
fn thin_svd(v: &Mat) -> (Mat, Vec<f64>, Mat) {
    let svd = v.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let wt = svd.v_t.expect("v_t requested");
    (u, svd.singular_values.iter().copied().collect(), wt.transpose())
}

impl Grassmann {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::invalid(format!("grassmann({n},{k}) needs 0 < k < n")));
        }
        let curvature = if k >= 2 && n - k >= 2 { 2.0 } else { 1.0 };
        Ok(Grassmann {
            n,
            k,
            curvature,
            injectivity: FRAC_PI_2,
        })
    }

    /// Override the reported curvature bound and injectivity radius.
    pub fn with_geometry(mut self, curvature: f64, injectivity: f64) -> Self {
        self.curvature = curvature;
        self.injectivity = injectivity;
        self
    }

    /// Geodesic endpoint `X W cos Σ Wᵀ + U sin Σ Wᵀ` without re-orthonormalization.
    fn geodesic_end(x: &Mat, v: &Mat) -> Mat {
        let (u, s, w) = thin_svd(v);
        let cos = Mat::from_diagonal(&nalgebra::DVector::from_iterator(s.len(), s.iter().map(|t| t.cos())));
        let sin = Mat::from_diagonal(&nalgebra::DVector::from_iterator(s.len(), s.iter().map(|t| t.sin())));
        x * &w * cos * w.transpose() + u * sin * w.transpose()
    }
}

impl Manifold for Grassmann {
    fn id(&self) -> ManifoldId {
        ManifoldId::new(format!("grassmann({},{})", self.n, self.k))
    }

    fn kind(&self) -> &'static str {
        "grassmann"
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    fn geometry(&self) -> GeometryInfo {
        GeometryInfo {
            curvature_bound: self.curvature,
            injectivity_radius: self.injectivity,
            dimension: self.k * (self.n - self.k),
        }
    }

    fn feasibility_residual(&self, x: &Mat) -> f64 {
        orthonormality_residual(x)
    }

    fn tangency_residual(&self, x: &Mat, v: &Mat) -> f64 {
        (x.transpose() * v).norm()
    }

    fn normalize_coords(&self, x: Mat) -> Mat {
        orthonormalize(&x)
    }

    fn project_coords(&self, x: &Mat, a: &Mat) -> Mat {
        a - x * (x.transpose() * a)
    }

    fn exp_coords(&self, x: &Mat, v: &Mat) -> Mat {
        orthonormalize(&Self::geodesic_end(x, v))
    }

    /// `U atan(Σ) Wᵀ` from the SVD of `(I − XXᵀ) Y (XᵀY)⁻¹`; independent of the
    /// representative chosen for `y`.
    fn log_coords(&self, x: &Mat, y: &Mat) -> Result<Mat> {
        let m = x.transpose() * y;
        let smin = m.clone().svd(false, false).singular_values.min();
        if smin < 1e-12 {
            return Err(Error::domain(
                "subspaces have a principal angle of π/2",
                self.injectivity,
            ));
        }
        let minv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::domain("XᵀY is singular", self.injectivity))?;
        let a = (y - x * &m) * minv;
        let (u, s, w) = thin_svd(&a);
        let ang = Mat::from_diagonal(&nalgebra::DVector::from_iterator(s.len(), s.iter().map(|t| t.atan())));
        Ok(u * ang * w.transpose())
    }

    /// `√Σθᵢ²` over the principal angles.
    fn dist_coords(&self, x: &Mat, y: &Mat) -> Result<f64> {
        match self.log_coords(x, y) {
            Ok(v) => Ok(v.norm()),
            Err(_) => {
                let s = (x.transpose() * y).svd(false, false).singular_values;
                Ok(s.iter().map(|c| c.clamp(-1.0, 1.0).acos().powi(2)).sum::<f64>().sqrt())
            }
        }
    }

    /// `([XW U][−sin Σ; cos Σ] Uᵀ + I − UUᵀ) w`, expressed at the geodesic endpoint.
    fn transport_along_coords(&self, x: &Mat, v: &Mat, w: &Mat) -> Mat {
        let (u, s, wv) = thin_svd(v);
        let k = s.len();
        let sin = Mat::from_diagonal(&nalgebra::DVector::from_iterator(k, s.iter().map(|t| t.sin())));
        let cos = Mat::from_diagonal(&nalgebra::DVector::from_iterator(k, s.iter().map(|t| t.cos())));
        let ut_w = u.transpose() * w;
        let rotated = (x * &wv) * (-sin) * &ut_w + &u * cos * &ut_w;
        rotated + w - &u * ut_w
    }

    fn transport_coords(&self, x: &Mat, y: &Mat, w: &Mat) -> Result<Mat> {
        let v = self.log_coords(x, y)?;
        let end = Self::geodesic_end(x, &v);
        let moved = self.transport_along_coords(x, &v, w);
        // Re-express the horizontal lift at the caller's representative of y.
        let align = end.transpose() * y;
        let out = moved * align;
        Ok(self.project_coords(y, &out))
    }

    fn random_coords(&self, rng: &mut dyn RngCore) -> Mat {
        let g = Mat::from_fn(self.n, self.k, |_, _| rng.sample::<f64, _>(StandardNormal));
        orthonormalize(&g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis(n: usize, cols: &[usize]) -> Mat {
        let mut m = Mat::zeros(n, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            m[(c, j)] = 1.0;
        }
        m
    }

    #[test]
    fn log_ignores_representative_rotation() {
        let g = Grassmann::new(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = g.random_point(&mut rng);
        let v = g.sample_tangent_ball(&x, 0.5, &mut rng).unwrap();
        let y = g.exp(&x, &v).unwrap();
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = Mat::from_row_slice(2, 2, &[c, -s, s, c]);
        let y_rot = g.point(y.coords() * rot).unwrap();
        let l1 = g.log(&x, &y).unwrap();
        let l2 = g.log(&x, &y_rot).unwrap();
        assert!((l1.coords() - l2.coords()).norm() < 1e-12);
        assert!((l1.coords() - v.coords()).norm() < 1e-12);
    }

    #[test]
    fn orthogonal_subspaces_have_no_log() {
        let g = Grassmann::new(4, 2).unwrap();
        let x = g.point(basis(4, &[0, 1])).unwrap();
        let y = g.point(basis(4, &[2, 3])).unwrap();
        assert!(matches!(g.log(&x, &y), Err(Error::Domain { .. })));
        let d = g.dist(&x, &y).unwrap();
        assert!((d - (2.0f64).sqrt() * FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn transport_to_rotated_representative_is_isometric() {
        let g = Grassmann::new(6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = g.random_point(&mut rng);
        let v = g.sample_tangent_ball(&x, 0.7, &mut rng).unwrap();
        let y = g.exp(&x, &v).unwrap();
        let q = g.random_point(&mut rng);
        let rot = orthonormalize(&q.coords().rows(0, 3).into_owned());
        let y_rot = g.point(y.coords() * rot).unwrap();
        let w = g.sample_tangent_ball(&x, 1.0, &mut rng).unwrap();
        let moved = g.transport(&x, &y_rot, &w).unwrap();
        assert!((moved.norm() - w.norm()).abs() < 1e-12);
        assert!(g.tangency_residual(y_rot.coords(), moved.coords()) < 1e-12);
    }
}
