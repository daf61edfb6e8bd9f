use nalgebra::SymmetricEigen;
use rand::RngCore;

use super::Objective;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::{Point, Tangent};

/// Cap on Lanczos steps (Hessian-vector products).
pub const EIG_MAX_ITERS: usize = 500;

/// Central-difference step `ε_mach^{1/3}·(1+‖x‖)/(1+‖v‖)`.
pub fn default_step(x: &Point, v: &Tangent) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.coords().norm()) / (1.0 + v.norm())
}

/// Gradient at `Exp_x(s·v)` carried back to `T_xM` along the same geodesic.
fn transported_gradient(obj: &dyn Objective, x: &Point, v: &Tangent, s: f64) -> Result<Tangent> {
    let m = obj.manifold();
    let step = v.scale(s);
    let (end, velocity) = m.transport_along(x, &step, &step)?;
    let g = obj.rgrad(&end)?;
    let back = velocity.scale(-1.0);
    let back = Tangent::from_parts(end.clone(), back.coords().clone());
    let (_, g_home) = m.transport_along(&end, &back, &g)?;
    Ok(Tangent::from_parts(x.clone(), g_home.coords().clone()))
}

/// Finite-difference Riemannian Hessian-vector product
/// `[Γ grad f(Exp_x(sv)) − Γ grad f(Exp_x(−sv))] / 2s`, projected onto `T_xM`.
pub fn hess_vec(obj: &dyn Objective, x: &Point, v: &Tangent, step: f64) -> Result<Tangent> {
    let m = obj.manifold();
    m.check_tangent_at(x, v)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let vn = v.norm();
    if vn == 0.0 {
        return Ok(Tangent::zero(x));
    }
    let inj = m.geometry().injectivity_radius;
    if step * vn >= inj {
        return Err(Error::domain(
            format!(
                "finite-difference geodesic of length {:.3e} leaves the injectivity ball",
                step * vn
            ),
            inj,
        ));
    }
    let plus = transported_gradient(obj, x, v, step)?;
    let minus = transported_gradient(obj, x, v, -step)?;
    let diff = (plus.coords() - minus.coords()) / (2.0 * step);
    m.project_tangent(x, &diff)
}

pub fn hess_vec_default(obj: &dyn Objective, x: &Point, v: &Tangent) -> Result<Tangent> {
    hess_vec(obj, x, v, default_step(x, v))
}

#[derive(Clone, Debug)]
pub struct EigEstimate {
    pub lambda_min: f64,
    /// Unit approximate eigenvector.
    pub direction: Tangent,
    /// False when the step cap was reached first; the estimate is still the best Ritz value.
    pub converged: bool,
    /// Hessian-vector products used.
    pub iterations: usize,
    /// `‖H·direction − lambda_min·direction‖`.
    pub residual: f64,
}

/// Smallest eigenvalue of the Riemannian Hessian from finite-difference
/// Hessian-vector products.
pub fn min_hess_eig(obj: &dyn Objective, x: &Point, tol: f64, rng: &mut dyn RngCore) -> Result<EigEstimate> {
    min_hess_eig_with(obj, x, tol, rng, &|v| hess_vec_default(obj, x, v))
}

/// Lanczos with full reorthogonalization for an arbitrary symmetric tangent operator.
///
/// Stops when the smallest Ritz pair has residual at most `tol`, or when the
/// Krylov basis spans the whole tangent space. An invariant subspace found early
/// restarts the recurrence from a fresh random direction, so a start vector
/// that happens to miss the bottom eigenvector cannot stall the search.
pub fn min_hess_eig_with(
    obj: &dyn Objective,
    x: &Point,
    tol: f64,
    rng: &mut dyn RngCore,
    hess: &dyn Fn(&Tangent) -> Result<Tangent>,
) -> Result<EigEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let m = obj.manifold();
    m.check_point(x)?;
    let dim = m.geometry().dimension.max(1);
    let max_steps = EIG_MAX_ITERS.min(dim);

    let mut basis: Vec<Tangent> = Vec::new();
    // Projects out the basis twice; a single pass loses orthogonality in floating point.
    let orthogonalize = |w: Tangent, basis: &[Tangent]| -> Result<Tangent> {
        let mut w = m.project_tangent(x, w.coords())?;
        for _ in 0..2 {
            for q in basis {
                w = w.lin_comb(1.0, q, -q.dot(&w));
            }
        }
        Ok(w)
    };
    let fresh = |basis: &[Tangent], rng: &mut dyn RngCore| -> Result<Option<Tangent>> {
        let w = orthogonalize(m.sample_tangent_ball(x, 1.0, rng)?, basis)?;
        let n = w.norm();
        Ok((n > 1e-8).then(|| w.scale(1.0 / n)))
    };

    let mut q = fresh(&basis, rng)?.ok_or_else(|| Error::Numerical("degenerate start vector".into()))?;
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut scale: f64 = 0.0;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    loop {
        let hq = hess(&q)?;
        let a = q.dot(&hq);
        if !a.is_finite() || !hq.norm().is_finite() {
            return Err(Error::Numerical("Hessian-vector product is not finite".into()));
        }
        basis.push(q.clone());
        alpha.push(a);
        let w = orthogonalize(hq, &basis)?;
        let b = w.norm();
        scale = scale.max(a.abs()).max(b);
        let k = basis.len();
        let invariant = b <= 1e-10 * scale.max(f64::MIN_POSITIVE);

        let done_dim = k >= dim;
        let check = k < 50 || k.is_multiple_of(25) || k >= max_steps || done_dim || invariant;
        if check {
            let t = Mat::from_fn(k, k, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let i = eig.eigenvalues.imin();
            let s: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let residual = if invariant { 0.0 } else { b * s[k - 1].abs() };
            best = Some((eig.eigenvalues[i], s, residual));
            let exhausted = done_dim || k >= max_steps;
            if exhausted || (!invariant && residual <= tol) {
                break;
            }
        }
        if invariant {
            match fresh(&basis, rng)? {
                Some(next) => {
                    beta.push(0.0);
                    q = next;
                }
                None => break,
            }
        } else {
            beta.push(b);
            q = w.scale(1.0 / b);
        }
    }

    let (lambda, s, mut residual) = best.expect("at least one Ritz check runs");
    let mut v = Tangent::zero(x);
    for (c, q) in s.iter().zip(&basis) {
        v = v.lin_comb(1.0, q, *c);
    }
    let v = v.scale(1.0 / v.norm());
    let converged = residual <= tol || basis.len() >= dim;
    if basis.len() >= dim {
        residual = hess(&v)?.lin_comb(1.0, &v, -lambda).norm();
    }
    Ok(EigEstimate {
        lambda_min: lambda,
        direction: v,
        converged,
        iterations: basis.len(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::column;
    use crate::manifold::Sphere;
    use crate::objective::Quadratic;
    use crate::rng::seeded;
    use std::sync::Arc;

    fn sphere_saddle() -> Quadratic {
        Quadratic::new(vec![1.0, -1.0, 4.0], Arc::new(Sphere::new(3).unwrap())).unwrap()
    }

    #[test]
    fn zero_direction_gives_zero() {
        let f = sphere_saddle();
        let x = f.manifold().point(column(&[1.0, 0.0, 0.0])).unwrap();
        let v = Tangent::zero(&x);
        assert_eq!(hess_vec(&f, &x, &v, 1e-5).unwrap().norm(), 0.0);
    }

    #[test]
    fn saddle_directions() {
        let f = sphere_saddle();
        let m = f.manifold().clone();
        let x = m.point(column(&[1.0, 0.0, 0.0])).unwrap();
        let e2 = m.tangent(&x, column(&[0.0, 1.0, 0.0])).unwrap();
        let e3 = m.tangent(&x, column(&[0.0, 0.0, 1.0])).unwrap();
        let h2 = hess_vec_default(&f, &x, &e2).unwrap();
        let h3 = hess_vec_default(&f, &x, &e3).unwrap();
        assert!((h2.coords() - e2.coords() * -4.0).norm() < 1e-5);
        assert!((h3.coords() - e3.coords() * 6.0).norm() < 1e-5);
    }

    #[test]
    fn oversized_step_is_domain_error() {
        let f = sphere_saddle();
        let m = f.manifold().clone();
        let x = m.point(column(&[1.0, 0.0, 0.0])).unwrap();
        let e2 = m.tangent(&x, column(&[0.0, 1.0, 0.0])).unwrap();
        assert!(matches!(hess_vec(&f, &x, &e2, 4.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn min_eig_at_saddle_and_minimum() {
        let f = sphere_saddle();
        let m = f.manifold().clone();
        let mut rng = seeded(1);
        let x = m.point(column(&[1.0, 0.0, 0.0])).unwrap();
        let est = min_hess_eig(&f, &x, 1e-6, &mut rng).unwrap();
        assert!(est.converged);
        assert!((est.lambda_min + 4.0).abs() < 1e-6, "{}", est.lambda_min);
        assert!((est.direction.coords()[(1, 0)].abs() - 1.0).abs() < 1e-3);
        let y = m.point(column(&[0.0, 1.0, 0.0])).unwrap();
        let est = min_hess_eig(&f, &y, 1e-6, &mut rng).unwrap();
        assert!((est.lambda_min - 4.0).abs() < 1e-6, "{}", est.lambda_min);
    }
}
