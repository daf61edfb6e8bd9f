use rand::RngCore;

use super::hessian::hess_vec_default;
use super::Objective;
use crate::error::{Error, Result};
use crate::manifold::{Point, Tangent};
use crate::rng::substream;

/// Empirical gradient and Hessian Lipschitz constants over a sampled region.
/// Both are lower bounds on the true constants of that region.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessEstimate {
    pub beta_hat: f64,
    pub rho_hat: f64,
    pub num_samples: usize,
    pub region_radius: f64,
    /// Pairs that contributed (closer than the injectivity radius, not degenerate).
    pub pairs_used: usize,
}

const POINT_STREAM: u64 = 1 << 40;
const PAIR_STREAM: u64 = 2 << 40;

/// Sample `n_samples` points in the geodesic ball around `center` (the center is
/// sample 0) and take the max difference quotients over all pairs:
/// `‖grad f(y) − Γ_x^y grad f(x)‖ / d(x,y)` and
/// `‖H(y)[Γu] − Γ H(x)[u]‖ / d(x,y)` for a unit tangent `u` drawn per pair.
///
/// Point `i` and the direction of pair `(i, j)` come from their own substreams,
/// so growing `n_samples` only adds pairs and never lowers either estimate.
pub fn estimate_smoothness(
    obj: &dyn Objective,
    center: &Point,
    radius: f64,
    n_samples: usize,
    rng: &mut dyn RngCore,
) -> Result<SmoothnessEstimate> {
    let m = obj.manifold();
    m.check_point(center)?;
    let inj = m.geometry().injectivity_radius;
    if n_samples < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {n_samples}")));
    }
    if !(radius > 0.0) || radius >= inj {
        return Err(Error::invalid(format!("region radius {radius} must lie in (0, {inj})")));
    }
    let seed = rng.next_u64();
    let mut points = vec![center.clone()];
    for i in 1..n_samples {
        let mut r = substream(seed, POINT_STREAM + i as u64);
        let xi = m.sample_tangent_ball(center, radius, &mut r)?;
        points.push(m.exp(center, &xi)?);
    }
    let grads: Vec<Tangent> = points.iter().map(|p| obj.rgrad(p)).collect::<Result<_>>()?;

    let hess = |p: &Point, v: &Tangent| -> Result<Tangent> {
        if obj.has_exact_hessian() {
            obj.exact_hess_vec(p, v)
        } else {
            hess_vec_default(obj, p, v)
        }
    };

    let mut beta: f64 = 0.0;
    let mut rho: f64 = 0.0;
    let mut used = 0;
    for i in 0..n_samples {
        for j in (i + 1)..n_samples {
            let (x, y) = (&points[i], &points[j]);
            let d = m.dist(x, y)?;
            if d < 1e-12 || d >= inj {
                continue;
            }
            let g_moved = match m.transport(x, y, &grads[i]) {
                Ok(t) => t,
                Err(Error::Domain { .. }) => continue,
                Err(e) => return Err(e),
            };
            used += 1;
            beta = beta.max((grads[j].coords() - g_moved.coords()).norm() / d);

            let mut r = substream(seed, PAIR_STREAM + ((i as u64) << 20) + j as u64);
            let u = m.sample_tangent_ball(x, 1.0, &mut r)?;
            let u = u.scale(1.0 / u.norm());
            let u_moved = m.transport(x, y, &u)?;
            let hu_moved = m.transport(x, y, &hess(x, &u)?)?;
            let hy = hess(y, &u_moved)?;
            rho = rho.max((hy.coords() - hu_moved.coords()).norm() / d);
        }
    }
    if used == 0 {
        return Err(Error::invalid("every sampled pair was degenerate"));
    }
    Ok(SmoothnessEstimate {
        beta_hat: beta,
        rho_hat: rho,
        num_samples: n_samples,
        region_radius: radius,
        pairs_used: used,
    })
}
