use std::fmt;

use crate::error::{Error, Result};

/// Problem and accuracy constants the thresholds are derived from.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionParams {
    /// Gradient Lipschitz constant.
    pub beta: f64,
    /// Hessian Lipschitz constant.
    pub rho: f64,
    /// Sectional curvature bound.
    pub curvature_k: f64,
    /// Injectivity radius, possibly infinite.
    pub injectivity: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Upper bound on `f(x₀) − f*`.
    pub f_gap: f64,
    pub dim_d: usize,
    /// Effective Hessian constant, at least `rho`.
    pub rho_hat: f64,
}

impl AssumptionParams {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        for (name, v) in [
            ("beta", self.beta),
            ("rho", self.rho),
            ("epsilon", self.epsilon),
            ("f_gap", self.f_gap),
            ("rho_hat", self.rho_hat),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                bad.push(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.curvature_k >= 0.0) {
            bad.push(format!("curvature_k must be nonnegative, got {}", self.curvature_k));
        }
        if !(self.injectivity > 0.0) {
            bad.push(format!("injectivity must be positive, got {}", self.injectivity));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bad.push(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if self.dim_d == 0 {
            bad.push("dim_d must be positive".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(bad.join("; ")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every threshold from the worst-case formulas.
    Theory,
    /// User-tunable step size, radius and thresholds.
    Practical,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Theory => "theory",
            Mode::Practical => "practical",
        })
    }
}

/// Every constant the algorithm runs with.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSet {
    pub mode: Mode,
    pub c_hat: f64,
    pub c_max: f64,
    pub chi: f64,
    /// Perturbation radius.
    pub r: f64,
    pub f_thres: f64,
    pub g_thres: f64,
    pub t_thres: u64,
    /// Step size.
    pub eta: f64,
    /// `√(ρ̂ε)`.
    pub gamma: f64,
    /// `β/γ`.
    pub kappa: f64,
    pub script_f: f64,
    pub script_g: f64,
    pub script_s: f64,
    pub script_t: f64,
    /// Injectivity radius used by the step clamp.
    pub injectivity: f64,
}

impl ThresholdSet {
    /// `(name, value)` pairs in a fixed order, for audit output.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("c_hat", self.c_hat),
            ("c_max", self.c_max),
            ("chi", self.chi),
            ("r", self.r),
            ("f_thres", self.f_thres),
            ("g_thres", self.g_thres),
            ("t_thres", self.t_thres as f64),
            ("eta", self.eta),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("script_F", self.script_f),
            ("script_G", self.script_g),
            ("script_S", self.script_s),
            ("script_T", self.script_t),
            ("injectivity", self.injectivity),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub thresholds: ThresholdSet,
    pub warnings: Vec<String>,
}

/// `(𝓕, 𝓖, 𝓢, 𝓣)` for a given step size.
fn scripts(p: &AssumptionParams, eta: f64, gamma: f64, kappa: f64) -> (f64, f64, f64, f64) {
    let log = (p.dim_d as f64 * kappa / p.delta).ln();
    let eb = eta * p.beta;
    let f = eb * gamma.powi(3) / p.rho_hat.powi(2) / log.powi(3);
    let g = eb.sqrt() * gamma.powi(2) / p.rho_hat / log.powi(2);
    let s = eb.sqrt() * gamma / p.rho_hat / log;
    let t = log / (eta * gamma);
    (f, g, s, t)
}

/// The constants box of the algorithm, with `c_max` at its largest admissible
/// value `(1/(56ĉ²))²`.
pub fn derive_thresholds(p: &AssumptionParams, c_hat: f64) -> Result<Derivation> {
    p.validate()?;
    if !(c_hat >= 4.0) {
        return Err(Error::invalid(format!("c_hat must be at least 4, got {c_hat}")));
    }
    let mut warnings = Vec::new();
    let eps = p.epsilon;
    let c_max = (1.0 / (56.0 * c_hat * c_hat)).powi(2);
    let log_arg = p.dim_d as f64 * p.beta * p.f_gap / (c_hat * eps * eps * p.delta);
    let chi = 3.0 * log_arg.ln().max(4.0);
    let r = c_max.sqrt() / (chi * chi) * eps;
    let f_thres = c_max / chi.powi(3) * (eps.powi(3) / p.rho_hat).sqrt();
    let g_thres = c_max.sqrt() / (chi * chi) * eps;
    let t_thres_real = chi / c_max * p.beta / (p.rho_hat * eps).sqrt();
    if t_thres_real > u64::MAX as f64 {
        return Err(Error::invalid(format!("t_thres = {t_thres_real:.3e} overflows")));
    }
    let t_thres = t_thres_real.ceil() as u64;
    let eta = c_max / p.beta;
    let gamma = (p.rho_hat * eps).sqrt();
    let kappa = p.beta / gamma;
    let dk = p.dim_d as f64 * kappa / p.delta;
    if dk.ln() < 1.0 {
        warnings.push(format!(
            "log(dκ/δ) = {:.4} < 1: δ exceeds dκ/e and the escape window constants lose meaning",
            dk.ln()
        ));
    }
    if p.rho_hat < p.rho {
        warnings.push(format!("rho_hat = {} is below rho = {}", p.rho_hat, p.rho));
    }
    let (script_f, script_g, script_s, script_t) = scripts(p, eta, gamma, kappa);
    Ok(Derivation {
        thresholds: ThresholdSet {
            mode: Mode::Theory,
            c_hat,
            c_max,
            chi,
            r,
            f_thres,
            g_thres,
            t_thres,
            eta,
            gamma,
            kappa,
            script_f,
            script_g,
            script_s,
            script_t,
            injectivity: p.injectivity,
        },
        warnings,
    })
}

/// Optional practical-mode values; anything left `None` takes its default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PracticalOverrides {
    pub eta: Option<f64>,
    pub r: Option<f64>,
    pub g_thres: Option<f64>,
    pub t_thres: Option<u64>,
    pub f_thres: Option<f64>,
}

/// Practical thresholds: defaults `η = 0.1/β`, `r = √ε`, `g_thres = ε`,
/// `t_thres = ⌈4/(η√(ρ̂ε))⌉`, `f_thres = 0.1·√(ε³/ρ̂)`.
pub fn practical_thresholds(p: &AssumptionParams, c_hat: f64, o: &PracticalOverrides) -> Result<Derivation> {
    let Derivation {
        thresholds: base,
        warnings,
    } = derive_thresholds(p, c_hat)?;
    let eps = p.epsilon;
    let eta = o.eta.unwrap_or(0.1 / p.beta);
    let gamma = base.gamma;
    for (name, v) in [
        ("eta", Some(eta)),
        ("r", o.r),
        ("g_thres", o.g_thres),
        ("f_thres", o.f_thres),
    ] {
        if let Some(v) = v {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
    }
    let t_thres = match o.t_thres {
        Some(0) => return Err(Error::invalid("t_thres must be positive")),
        Some(t) => t,
        None => (4.0 / (eta * gamma)).ceil() as u64,
    };
    let (script_f, script_g, script_s, script_t) = scripts(p, eta, gamma, base.kappa);
    Ok(Derivation {
        thresholds: ThresholdSet {
            mode: Mode::Practical,
            r: o.r.unwrap_or(eps.sqrt()),
            g_thres: o.g_thres.unwrap_or(eps),
            f_thres: o.f_thres.unwrap_or(0.1 * (eps.powi(3) / p.rho_hat).sqrt()),
            t_thres,
            eta,
            script_f,
            script_g,
            script_s,
            script_t,
            ..base
        },
        warnings,
    })
}

/// Both sides of the accuracy condition under which the convergence rate holds,
/// evaluated with (fitted) curvature constants `c₂`, `c₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonBound {
    pub epsilon: f64,
    pub curvature_term: f64,
    pub injectivity_term: f64,
    pub satisfied: bool,
}

pub fn epsilon_bound(p: &AssumptionParams, thr: &ThresholdSet, c2: f64, c3: f64) -> EpsilonBound {
    let eps = p.epsilon;
    let log = (p.dim_d as f64 * p.beta / ((p.rho_hat * eps).sqrt() * p.delta)).ln();
    let eb = thr.eta * p.beta;
    let cmax = c2.max(c3);
    let curvature_term = if cmax > 0.0 {
        p.rho_hat / (56.0 * cmax * eb) * log
    } else {
        f64::INFINITY
    };
    let injectivity_term = (p.injectivity * p.rho_hat / (12.0 * thr.c_hat * eb.sqrt()) * log).powi(2);
    EpsilonBound {
        epsilon: eps,
        curvature_term,
        injectivity_term,
        satisfied: eps <= curvature_term.min(injectivity_term),
    }
}
