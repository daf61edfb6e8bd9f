use std::fmt::Write as _;

use rand::RngCore;

use super::report::fmt_f64;
use crate::error::{Error, Result};
use crate::manifold::{Point, Tangent};
use crate::objective::{min_hess_eig, min_hess_eig_with, Objective};
use crate::optimizer::ThresholdSet;

/// Growth of the separation between two gradient-descent sequences started a
/// distance `μ·r` apart along the most negative curvature direction `e₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingReport {
    pub mu: f64,
    pub eta: f64,
    pub gamma: f64,
    pub lambda_min: f64,
    /// Radius `3·ĉ·𝓢` of the ball the sequences are tracked in.
    pub escape_radius: f64,
    /// `e₁`-component of `Exp_x⁻¹(w_t) − Exp_x⁻¹(u_t)`, one entry per recorded step.
    pub psi: Vec<f64>,
    /// Norm of the component orthogonal to `e₁`.
    pub phi: Vec<f64>,
    /// `ψ_{t+1}/ψ_t` for the steps before escape.
    pub ratios: Vec<f64>,
    /// First `t` with `ψ_t ≥ 10·ψ₀`.
    pub tenfold_at: Option<usize>,
    /// First `t` at which both sequences are outside the escape ball.
    pub escaped_at: Option<usize>,
    /// Why recording stopped before `t_max`, if it did.
    pub stopped: Option<String>,
    /// Fraction of `ratios` at least `1 + η·γ/2`.
    pub growth_fraction: f64,
    /// At least one ratio and `growth_fraction ≥ 0.9`.
    pub pass: bool,
}

impl CouplingReport {
    pub fn predicted_ratio(&self) -> f64 {
        1.0 + self.eta * self.lambda_min.abs()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<usize>| v.map_or("none".to_string(), |t| t.to_string());
        let _ = writeln!(s, "lemma_id = coupling");
        let _ = writeln!(s, "mu = {}", fmt_f64(self.mu));
        let _ = writeln!(s, "eta = {}", fmt_f64(self.eta));
        let _ = writeln!(s, "gamma = {}", fmt_f64(self.gamma));
        let _ = writeln!(s, "lambda_min = {}", fmt_f64(self.lambda_min));
        let _ = writeln!(s, "predicted_ratio = {}", fmt_f64(self.predicted_ratio()));
        let _ = writeln!(s, "escape_radius = {}", fmt_f64(self.escape_radius));
        let _ = writeln!(s, "tenfold_at = {}", opt(self.tenfold_at));
        let _ = writeln!(s, "escaped_at = {}", opt(self.escaped_at));
        let _ = writeln!(s, "stopped = {}", self.stopped.as_deref().unwrap_or("none"));
        let _ = writeln!(s, "growth_fraction = {}", fmt_f64(self.growth_fraction));
        let _ = writeln!(s, "pass = {}", self.pass);
        let _ = writeln!(s, "\n[trace]");
        let _ = writeln!(s, "t psi phi");
        for (t, (p, f)) in self.psi.iter().zip(&self.phi).enumerate() {
            let _ = writeln!(s, "{t} {} {}", fmt_f64(*p), fmt_f64(*f));
        }
        s
    }
}

/// Run the coupled pair from a perturbation `u₀ = Exp_x(ξ)`, `ξ` uniform in the
/// ball of radius `r`, and `w₀ = Exp_x(Exp_x⁻¹(u₀) + μ·r·e₁)`, for up to `t_max`
/// plain gradient steps.
pub fn coupling_probe(
    obj: &dyn Objective,
    saddle_x: &Point,
    thr: &ThresholdSet,
    mu: f64,
    t_max: usize,
    rng: &mut dyn RngCore,
) -> Result<CouplingReport> {
    let m = obj.manifold();
    m.check_point(saddle_x)?;
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu must be nonnegative, got {mu}")));
    }
    let gn = obj.rgrad(saddle_x)?.norm();
    let eig = if obj.has_exact_hessian() {
        min_hess_eig_with(obj, saddle_x, 1e-10, rng, &|v| obj.exact_hess_vec(saddle_x, v))?
    } else {
        min_hess_eig(obj, saddle_x, 1e-8, rng)?
    };
    if gn > thr.g_thres || eig.lambda_min > -thr.gamma {
        return Err(Error::invalid(format!(
            "not an approximate saddle: gradient norm {gn:.3e}, smallest eigenvalue {:.3e}",
            eig.lambda_min
        )));
    }
    let e1 = eig.direction;
    let xi = m.sample_tangent_ball(saddle_x, thr.r, rng)?;
    let u0 = m.exp(saddle_x, &xi)?;
    let w0 = m.exp(saddle_x, &xi.lin_comb(1.0, &e1, mu * thr.r))?;
    let escape_radius = 3.0 * thr.c_hat * thr.script_s;
    let inj = m.geometry().injectivity_radius;

    let step = |p: &Point| -> Result<Point> {
        let g = obj.rgrad(p)?;
        let n = g.norm();
        let len = if n > 0.0 && inj.is_finite() {
            thr.eta.min(inj / n)
        } else {
            thr.eta
        };
        m.exp(p, &g.scale(-len))
    };
    let split = |u: &Point, w: &Point| -> Result<(f64, f64, f64, f64)> {
        let lu = m.log(saddle_x, u)?;
        let lw = m.log(saddle_x, w)?;
        let diff: Tangent = lw.lin_comb(1.0, &lu, -1.0);
        let psi = diff.dot(&e1);
        let phi = diff.lin_comb(1.0, &e1, -psi).norm();
        Ok((psi, phi, lu.norm(), lw.norm()))
    };

    let (mut u, mut w) = (u0, w0);
    let mut psi = Vec::new();
    let mut phi = Vec::new();
    let mut escaped_at = None;
    let mut stopped = None;
    for t in 0..=t_max {
        match split(&u, &w) {
            Ok((p, f, du, dw)) => {
                psi.push(p);
                phi.push(f);
                if escaped_at.is_none() && du > escape_radius && dw > escape_radius {
                    escaped_at = Some(t);
                }
            }
            Err(e) => {
                stopped = Some(format!("t = {t}: {e}"));
                break;
            }
        }
        if t == t_max {
            break;
        }
        match step(&u).and_then(|u1| Ok((u1, step(&w)?))) {
            Ok((u1, w1)) => {
                u = u1;
                w = w1;
            }
            Err(e) => {
                stopped = Some(format!("t = {t}: {e}"));
                break;
            }
        }
    }
    let psi0 = psi.first().copied().unwrap_or(0.0);
    let tenfold_at = (psi0 > 0.0)
        .then(|| psi.iter().position(|p| *p >= 10.0 * psi0))
        .flatten();
    let end = escaped_at.map_or(psi.len(), |t| t + 1).min(psi.len());
    let ratios: Vec<f64> = psi[..end]
        .windows(2)
        .filter(|p| p[0] != 0.0)
        .map(|p| p[1] / p[0])
        .collect();
    let target = 1.0 + thr.eta * thr.gamma / 2.0;
    let good = ratios.iter().filter(|r| **r >= target).count();
    let growth_fraction = if ratios.is_empty() {
        0.0
    } else {
        good as f64 / ratios.len() as f64
    };
    Ok(CouplingReport {
        mu,
        eta: thr.eta,
        gamma: thr.gamma,
        lambda_min: eig.lambda_min,
        escape_radius,
        psi,
        phi,
        pass: !ratios.is_empty() && growth_fraction >= 0.9,
        ratios,
        tenfold_at,
        escaped_at,
        stopped,
        growth_fraction,
    })
}
