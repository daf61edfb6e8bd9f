//! Manifold abstraction: points and tangents in ambient coordinates, the
//! exponential and inverse exponential maps, parallel transport along
//! geodesics, and the curvature data consumed by the optimizer.
//!
//! Every concrete manifold implements [`Manifold`] on raw coordinate
//! matrices. The provided methods wrap those kernels with shape, ownership
//! and domain checks and are what callers should use.

mod euclidean;
mod grassmann;
mod oblique;
mod registry;
mod sphere;
pub(crate) mod sphere_kernels;
mod stiefel;

pub use euclidean::Euclidean;
pub use grassmann::Grassmann;
pub use oblique::Oblique;
pub use registry::{ManifoldBuilder, ManifoldRegistry, ManifoldSpec};
pub use sphere::Sphere;
pub use stiefel::Stiefel;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{frob_inner, Mat};

/// Feasibility and tangency tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-10;

pub type SharedManifold = Arc<dyn Manifold>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ManifoldId(String);

impl ManifoldId {
    pub fn new(s: impl Into<String>) -> Self {
        ManifoldId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Curvature bound, injectivity radius and intrinsic dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryInfo {
    pub curvature_bound: f64,
    /// `f64::INFINITY` for flat space.
    pub injectivity_radius: f64,
    pub dimension: usize,
}

/// A manifold element stored in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    manifold: ManifoldId,
    coords: Mat,
}

impl Point {
    pub fn coords(&self) -> &Mat {
        &self.coords
    }

    pub fn manifold_id(&self) -> &ManifoldId {
        &self.manifold
    }

    pub fn into_coords(self) -> Mat {
        self.coords
    }

    pub(crate) fn from_parts(manifold: ManifoldId, coords: Mat) -> Self {
        Point { manifold, coords }
    }
}

/// A tangent vector anchored at a [`Point`].
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    base: Point,
    coords: Mat,
}

impl Tangent {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &Mat {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn zero(base: &Point) -> Self {
        let (r, c) = base.coords.shape();
        Tangent {
            base: base.clone(),
            coords: Mat::zeros(r, c),
        }
    }

    pub fn scale(&self, s: f64) -> Tangent {
        Tangent {
            base: self.base.clone(),
            coords: &self.coords * s,
        }
    }

    /// `a·self + b·other`; both must share a base point.
    pub fn lin_comb(&self, a: f64, other: &Tangent, b: f64) -> Tangent {
        debug_assert_eq!(self.coords.shape(), other.coords.shape());
        Tangent {
            base: self.base.clone(),
            coords: &self.coords * a + &other.coords * b,
        }
    }

    pub fn dot(&self, other: &Tangent) -> f64 {
        frob_inner(&self.coords, &other.coords)
    }

    pub(crate) fn from_parts(base: Point, coords: Mat) -> Self {
        Tangent { base, coords }
    }
}

pub trait Manifold: Send + Sync + fmt::Debug {
    fn id(&self) -> ManifoldId;

    /// Registry name of the manifold family, e.g. `"sphere"`.
    fn kind(&self) -> &'static str;

    /// Shape of the ambient coordinate array.
    fn shape(&self) -> (usize, usize);

    fn geometry(&self) -> GeometryInfo;

    fn feasibility_residual(&self, x: &Mat) -> f64;

    fn tangency_residual(&self, x: &Mat, v: &Mat) -> f64;

    /// Pull coordinates back onto the manifold to absorb rounding drift.
    fn normalize_coords(&self, x: Mat) -> Mat;

    fn project_coords(&self, x: &Mat, a: &Mat) -> Mat;

    fn exp_coords(&self, x: &Mat, v: &Mat) -> Mat;

    fn log_coords(&self, x: &Mat, y: &Mat) -> Result<Mat>;

    fn dist_coords(&self, x: &Mat, y: &Mat) -> Result<f64>;

    /// Parallel transport of `w` along `t ↦ Exp_x(t·v)`, `t ∈ [0, 1]`.
    fn transport_along_coords(&self, x: &Mat, v: &Mat, w: &Mat) -> Mat;

    /// Parallel transport of `w` from `x` to `y` along the minimizing geodesic.
    fn transport_coords(&self, x: &Mat, y: &Mat, w: &Mat) -> Result<Mat> {
        let v = self.log_coords(x, y)?;
        Ok(self.transport_along_coords(x, &v, w))
    }

    fn random_coords(&self, rng: &mut dyn RngCore) -> Mat;

    // ---- checked API ----------------------------------------------------

    /// Wrap coordinates as a point, rejecting anything off the manifold.
    fn point(&self, coords: Mat) -> Result<Point> {
        self.point_with_tol(coords, FEASIBILITY_TOL)
    }

    /// Accept coordinates with feasibility residual up to `tol`, then normalize.
    fn point_with_tol(&self, coords: Mat, tol: f64) -> Result<Point> {
        if coords.shape() != self.shape() {
            return Err(Error::invalid(format!(
                "{}: expected coordinates of shape {:?}, got {:?}",
                self.id(),
                self.shape(),
                coords.shape()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("{}: non-finite coordinates", self.id())));
        }
        let res = self.feasibility_residual(&coords);
        if res > tol {
            return Err(Error::invalid(format!(
                "{}: feasibility residual {res:.3e} exceeds {tol:.1e}",
                self.id()
            )));
        }
        let coords = if res > 0.0 {
            self.normalize_coords(coords)
        } else {
            coords
        };
        Ok(Point::from_parts(self.id(), coords))
    }

    /// Wrap coordinates as a tangent at `x`, rejecting non-tangent input.
    fn tangent(&self, x: &Point, coords: Mat) -> Result<Tangent> {
        self.check_point(x)?;
        self.check_shape(&coords)?;
        let res = self.tangency_residual(&x.coords, &coords);
        if res > FEASIBILITY_TOL * coords.norm().max(1.0) {
            return Err(Error::invalid(format!(
                "{}: tangency residual {res:.3e} exceeds {FEASIBILITY_TOL:.1e}",
                self.id()
            )));
        }
        Ok(Tangent::from_parts(x.clone(), coords))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        Point::from_parts(self.id(), self.random_coords(rng))
    }

    fn check_shape(&self, a: &Mat) -> Result<()> {
        if a.shape() != self.shape() {
            return Err(Error::invalid(format!(
                "{}: expected array of shape {:?}, got {:?}",
                self.id(),
                self.shape(),
                a.shape()
            )));
        }
        Ok(())
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.manifold != self.id() {
            return Err(Error::invalid(format!(
                "point belongs to {}, not {}",
                x.manifold,
                self.id()
            )));
        }
        self.check_shape(&x.coords)
    }

    fn check_tangent_at(&self, x: &Point, v: &Tangent) -> Result<()> {
        self.check_point(x)?;
        self.check_shape(&v.coords)?;
        if v.base.manifold != x.manifold || v.base.coords != x.coords {
            return Err(Error::invalid("tangent vector is anchored at a different point"));
        }
        Ok(())
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        self.check_tangent_at(x, u)?;
        self.check_tangent_at(x, v)?;
        Ok(frob_inner(&u.coords, &v.coords))
    }

    fn norm(&self, x: &Point, v: &Tangent) -> Result<f64> {
        self.check_tangent_at(x, v)?;
        Ok(v.coords.norm())
    }

    fn exp(&self, x: &Point, v: &Tangent) -> Result<Point> {
        self.check_tangent_at(x, v)?;
        if v.coords.iter().all(|c| *c == 0.0) {
            return Ok(x.clone());
        }
        Ok(Point::from_parts(self.id(), self.exp_coords(&x.coords, &v.coords)))
    }

    fn log(&self, x: &Point, y: &Point) -> Result<Tangent> {
        self.check_point(x)?;
        self.check_point(y)?;
        let v = self.log_coords(&x.coords, &y.coords)?;
        Ok(Tangent::from_parts(x.clone(), v))
    }

    fn dist(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        self.dist_coords(&x.coords, &y.coords)
    }

    fn transport(&self, x: &Point, y: &Point, w: &Tangent) -> Result<Tangent> {
        self.check_tangent_at(x, w)?;
        self.check_point(y)?;
        if x.coords == y.coords {
            return Ok(Tangent::from_parts(y.clone(), w.coords.clone()));
        }
        let out = self.transport_coords(&x.coords, &y.coords, &w.coords)?;
        Ok(Tangent::from_parts(y.clone(), out))
    }

    /// Transport `w` along `t ↦ Exp_x(t·v)`; the result is anchored at `Exp_x(v)`.
    fn transport_along(&self, x: &Point, v: &Tangent, w: &Tangent) -> Result<(Point, Tangent)> {
        self.check_tangent_at(x, v)?;
        self.check_tangent_at(x, w)?;
        let y = self.exp(x, v)?;
        if y.coords == x.coords {
            return Ok((y.clone(), Tangent::from_parts(y, w.coords.clone())));
        }
        let moved = self.transport_along_coords(&x.coords, &v.coords, &w.coords);
        let moved = self.project_coords(&y.coords, &moved);
        Ok((y.clone(), Tangent::from_parts(y, moved)))
    }

    fn project_tangent(&self, x: &Point, a: &Mat) -> Result<Tangent> {
        self.check_point(x)?;
        self.check_shape(a)?;
        Ok(Tangent::from_parts(x.clone(), self.project_coords(&x.coords, a)))
    }

    /// Uniform sample from the tangent ball of the given radius: direction from a
    /// projected standard normal, norm `radius·U^{1/d}`.
    fn sample_tangent_ball(&self, x: &Point, radius: f64, rng: &mut dyn RngCore) -> Result<Tangent> {
        self.check_point(x)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        let d = self.geometry().dimension as f64;
        let (r, c) = self.shape();
        let dir = loop {
            let g = Mat::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
            let p = self.project_coords(&x.coords, &g);
            let n = p.norm();
            if n > 1e-12 {
                break p / n;
            }
        };
        let u: f64 = rng.gen();
        let len = radius * u.powf(1.0 / d);
        Ok(Tangent::from_parts(x.clone(), dir * len.min(radius)))
    }
}
