use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::sphere_kernels as k;
use super::{GeometryInfo, Manifold, ManifoldId};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Oblique manifold: `d × p` matrices with unit-norm rows, i.e. the product of
/// `d` unit spheres in `ℝᵖ`. Every map acts row by row; the distance is the
/// ℓ₂ combination of the per-row great-circle distances.
///
/// The inverse exponential map is defined as long as no row pair is antipodal,
/// which is the cut locus of the product metric.
#[derive(Clone, Debug)]
pub struct Oblique {
    d: usize,
    p: usize,
}

impl Oblique {
    pub fn new(d: usize, p: usize) -> Result<Self> {
        if d == 0 || p < 2 {
            return Err(Error::invalid(format!("oblique({d},{p}) needs d ≥ 1 and p ≥ 2")));
        }
        Ok(Oblique { d, p })
    }

    fn row(m: &Mat, i: usize) -> Vec<f64> {
        m.row(i).iter().copied().collect()
    }

    fn rowwise(&self, f: impl Fn(usize) -> Vec<f64>) -> Mat {
        let mut out = Mat::zeros(self.d, self.p);
        for i in 0..self.d {
            for (j, v) in f(i).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

impl Manifold for Oblique {
    fn id(&self) -> ManifoldId {
        ManifoldId::new(format!("oblique({},{})", self.d, self.p))
    }

    fn kind(&self) -> &'static str {
        "oblique"
    }

    fn shape(&self) -> (usize, usize) {
        (self.d, self.p)
    }

    fn geometry(&self) -> GeometryInfo {
        GeometryInfo {
            curvature_bound: 1.0,
            injectivity_radius: PI,
            dimension: self.d * (self.p - 1),
        }
    }

    fn feasibility_residual(&self, x: &Mat) -> f64 {
        x.row_iter().map(|r| (r.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    fn tangency_residual(&self, x: &Mat, v: &Mat) -> f64 {
        x.row_iter()
            .zip(v.row_iter())
            .map(|(a, b)| a.dot(&b).abs())
            .fold(0.0, f64::max)
    }

    fn normalize_coords(&self, mut x: Mat) -> Mat {
        for mut r in x.row_iter_mut() {
            let n = r.norm();
            if n > 0.0 {
                r /= n;
            }
        }
        x
    }

    fn project_coords(&self, x: &Mat, a: &Mat) -> Mat {
        self.rowwise(|i| k::project(&Self::row(x, i), &Self::row(a, i)))
    }

    fn exp_coords(&self, x: &Mat, v: &Mat) -> Mat {
        self.rowwise(|i| k::exp(&Self::row(x, i), &Self::row(v, i)))
    }

    fn log_coords(&self, x: &Mat, y: &Mat) -> Result<Mat> {
        let mut out = Mat::zeros(self.d, self.p);
        for i in 0..self.d {
            let r = k::log(&Self::row(x, i), &Self::row(y, i))
                .ok_or_else(|| Error::domain(format!("row {i} is antipodal"), PI))?;
            for (j, v) in r.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    fn dist_coords(&self, x: &Mat, y: &Mat) -> Result<f64> {
        Ok((0..self.d)
            .map(|i| k::dist(&Self::row(x, i), &Self::row(y, i)).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    fn transport_along_coords(&self, x: &Mat, v: &Mat, w: &Mat) -> Mat {
        self.rowwise(|i| k::transport_along(&Self::row(x, i), &Self::row(v, i), &Self::row(w, i)))
    }

    fn random_coords(&self, rng: &mut dyn RngCore) -> Mat {
        let g = Mat::from_fn(self.d, self.p, |_, _| rng.sample::<f64, _>(StandardNormal));
        self.normalize_coords(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn one_row_quarter_turn_distance() {
        let m = Oblique::new(2, 3).unwrap();
        let y = m
            .point(Mat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]))
            .unwrap();
        let y2 = m
            .point(Mat::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]))
            .unwrap();
        assert!((m.dist(&y, &y2).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn distance_combines_rows_in_l2() {
        let m = Oblique::new(2, 3).unwrap();
        let a = m
            .point(Mat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]))
            .unwrap();
        let b = m
            .point(Mat::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]))
            .unwrap();
        let expected = (2.0 * FRAC_PI_2 * FRAC_PI_2).sqrt();
        assert!((m.dist(&a, &b).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn antipodal_row_is_a_domain_error() {
        let m = Oblique::new(2, 2).unwrap();
        let a = m.point(Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0])).unwrap();
        let b = m.point(Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(matches!(m.log(&a, &b), Err(Error::Domain { .. })));
    }
}
