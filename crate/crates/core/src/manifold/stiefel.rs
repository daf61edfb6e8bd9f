use std::f64::consts::FRAC_PI_2;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{GeometryInfo, Manifold, ManifoldId};
use crate::error::{Error, Result};
use crate::linalg::{orthonormality_residual, orthonormalize, sym, Mat};

/// Stiefel manifold of orthonormal `n × k` frames with the embedded metric.
///
/// Geodesics have the closed form
/// `[X(t) X′(t)] = [X V] exp(t[[A, −S], [I, A]]) diag(e^{−At}, e^{−At})`
/// with `A = XᵀV`, `S = VᵀV`. There is no closed-form inverse, so `log`,
/// `dist` and point-to-point transport return capability errors; transport
/// along `t ↦ Exp_x(tv)` integrates `W′ = −X sym(X′ᵀW)` with RK4.
#[derive(Clone, Debug)]
pub struct Stiefel {
    n: usize,
    k: usize,
    curvature: f64,
    injectivity: f64,
}

const TRANSPORT_STEPS: usize = 200;

impl Stiefel {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!("stiefel({n},{k}) needs 0 < k ≤ n")));
        }
        Ok(Stiefel {
            n,
            k,
            curvature: 1.0,
            injectivity: FRAC_PI_2,
        })
    }

    pub fn with_geometry(mut self, curvature: f64, injectivity: f64) -> Self {
        self.curvature = curvature;
        self.injectivity = injectivity;
        self
    }

    /// Position and velocity of the geodesic at time `t`.
    fn geodesic(&self, x: &Mat, v: &Mat, t: f64) -> (Mat, Mat) {
        let k = self.k;
        let a = x.transpose() * v;
        let s = v.transpose() * v;
        let mut block = Mat::zeros(2 * k, 2 * k);
        block.view_mut((0, 0), (k, k)).copy_from(&(&a * t));
        block.view_mut((0, k), (k, k)).copy_from(&(-&s * t));
        block.view_mut((k, 0), (k, k)).copy_from(&(Mat::identity(k, k) * t));
        block.view_mut((k, k), (k, k)).copy_from(&(&a * t));
        let e = block.exp();
        let back = (-&a * t).exp();
        let pos = e.view((0, 0), (2 * k, k)) * &back;
        let vel = e.view((0, k), (2 * k, k)) * &back;
        let combine = |m: &Mat| x * m.rows(0, k) + v * m.rows(k, k);
        (combine(&pos), combine(&vel))
    }
}

impl Manifold for Stiefel {
    fn id(&self) -> ManifoldId {
        ManifoldId::new(format!("stiefel({},{})", self.n, self.k))
    }

    fn kind(&self) -> &'static str {
        "stiefel"
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    fn geometry(&self) -> GeometryInfo {
        GeometryInfo {
            curvature_bound: self.curvature,
            injectivity_radius: self.injectivity,
            dimension: self.n * self.k - self.k * (self.k + 1) / 2,
        }
    }

    fn feasibility_residual(&self, x: &Mat) -> f64 {
        orthonormality_residual(x)
    }

    fn tangency_residual(&self, x: &Mat, v: &Mat) -> f64 {
        let xv = x.transpose() * v;
        (&xv + xv.transpose()).norm()
    }

    fn normalize_coords(&self, x: Mat) -> Mat {
        orthonormalize(&x)
    }

    /// `V − X sym(XᵀV)`.
    fn project_coords(&self, x: &Mat, a: &Mat) -> Mat {
        a - x * sym(&(x.transpose() * a))
    }

    fn exp_coords(&self, x: &Mat, v: &Mat) -> Mat {
        orthonormalize(&self.geodesic(x, v, 1.0).0)
    }

    fn log_coords(&self, _x: &Mat, _y: &Mat) -> Result<Mat> {
        Err(Error::capability(
            self.id().to_string(),
            "a closed-form inverse exponential map",
        ))
    }

    fn dist_coords(&self, _x: &Mat, _y: &Mat) -> Result<f64> {
        Err(Error::capability(
            self.id().to_string(),
            "a closed-form geodesic distance",
        ))
    }

    fn transport_along_coords(&self, x: &Mat, v: &Mat, w: &Mat) -> Mat {
        let h = 1.0 / TRANSPORT_STEPS as f64;
        let rhs = |t: f64, w: &Mat| -> Mat {
            let (pos, vel) = self.geodesic(x, v, t);
            -(&pos * sym(&(vel.transpose() * w)))
        };
        let mut cur = w.clone();
        for i in 0..TRANSPORT_STEPS {
            let t = i as f64 * h;
            let k1 = rhs(t, &cur);
            let k2 = rhs(t + 0.5 * h, &(&cur + &k1 * (0.5 * h)));
            let k3 = rhs(t + 0.5 * h, &(&cur + &k2 * (0.5 * h)));
            let k4 = rhs(t + h, &(&cur + &k3 * h));
            cur += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        cur
    }

    fn transport_coords(&self, _x: &Mat, _y: &Mat, _w: &Mat) -> Result<Mat> {
        Err(Error::capability(
            self.id().to_string(),
            "point-to-point parallel transport (needs the inverse exponential map)",
        ))
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

    fn e12(n: usize) -> Mat {
        let mut m = Mat::zeros(n, 2);
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        m
    }

    #[test]
    fn tiny_step_stays_close() {
        let st = Stiefel::new(4, 2).unwrap();
        let x = st.point(e12(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dir = st.sample_tangent_ball(&x, 1.0, &mut rng).unwrap();
        let v = dir.scale(1e-8 / dir.norm());
        let y = st.exp(&x, &v).unwrap();
        assert!((y.coords() - x.coords()).norm() <= 2e-8);
        assert!(st.feasibility_residual(y.coords()) < 1e-12);
    }

    #[test]
    fn symmetric_normal_component_projects_to_zero() {
        let st = Stiefel::new(3, 2).unwrap();
        let x = st.point(e12(3)).unwrap();
        let s = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, -1.0]);
        let p = st.project_tangent(&x, &(x.coords() * s)).unwrap();
        assert!(p.norm() < 1e-15);
    }

    #[test]
    fn geodesic_stays_on_manifold_and_matches_great_circle() {
        // k = 1 reduces to the sphere.
        let st = Stiefel::new(3, 1).unwrap();
        let x = st.point(Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let v = st.tangent(&x, Mat::from_column_slice(3, 1, &[0.0, 0.7, 0.0])).unwrap();
        let y = st.exp(&x, &v).unwrap();
        let expected = Mat::from_column_slice(3, 1, &[0.7f64.cos(), 0.7f64.sin(), 0.0]);
        assert!((y.coords() - expected).norm() < 1e-13);
    }

    #[test]
    fn transport_along_is_isometric_and_tangent() {
        let st = Stiefel::new(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = st.random_point(&mut rng);
        let v = st.sample_tangent_ball(&x, 0.8, &mut rng).unwrap();
        let w = st.sample_tangent_ball(&x, 1.0, &mut rng).unwrap();
        let (y, moved) = st.transport_along(&x, &v, &w).unwrap();
        assert!((moved.norm() - w.norm()).abs() < 1e-9);
        assert!(st.tangency_residual(y.coords(), moved.coords()) < 1e-10);
    }

    #[test]
    fn log_and_dist_are_capability_errors() {
        let st = Stiefel::new(4, 2).unwrap();
        let x = st.point(e12(4)).unwrap();
        assert!(matches!(st.log(&x, &x), Err(Error::Capability { .. })));
        assert!(matches!(st.dist(&x, &x), Err(Error::Capability { .. })));
    }
}
