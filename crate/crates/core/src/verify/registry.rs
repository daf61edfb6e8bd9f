use std::collections::BTreeMap;

use super::{
    check_descent, check_gradient_taylor, check_holonomy, check_linearization, check_log_bilipschitz,
    check_transport_contraction, check_two_step, coupling_probe, Control, CouplingReport, Region, VerificationReport,
};
use crate::error::{Error, Result};
use crate::manifold::{Point, SharedManifold};
use crate::objective::SharedObjective;
use crate::optimizer::ThresholdSet;
use crate::rng::seeded;

/// Everything a registered check may draw on. Checks that need an objective,
/// a saddle point or thresholds fail with an invalid-argument error when the
/// field is absent.
#[derive(Clone, Debug)]
pub struct CheckContext {
    pub manifold: SharedManifold,
    pub objective: Option<SharedObjective>,
    pub saddle: Option<Point>,
    pub thresholds: Option<ThresholdSet>,
    pub n_samples: usize,
    pub scales: Vec<f64>,
    /// Diameters for the log-map distortion check.
    pub radii: Vec<f64>,
    pub eta: f64,
    pub mu: f64,
    pub t_max: usize,
    pub seed: u64,
    pub control: Control,
}

impl CheckContext {
    fn objective(&self, id: &str) -> Result<&SharedObjective> {
        self.objective
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("check {id} needs an objective")))
    }

    fn saddle(&self, id: &str) -> Result<&Point> {
        self.saddle
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("check {id} needs a saddle point")))
    }
}

#[derive(Clone, Debug)]
pub enum CheckOutput {
    Scaling(VerificationReport),
    Coupling(CouplingReport),
}

impl CheckOutput {
    pub fn pass(&self) -> bool {
        match self {
            CheckOutput::Scaling(r) => r.pass,
            CheckOutput::Coupling(r) => r.pass,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            CheckOutput::Scaling(r) => r.to_text(),
            CheckOutput::Coupling(r) => r.to_text(),
        }
    }
}

type CheckFn = fn(&CheckContext) -> Result<CheckOutput>;

pub trait LemmaCheck: Send + Sync {
    fn id(&self) -> &'static str;
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutput>;
}

struct FnCheck {
    id: &'static str,
    f: fn(&CheckContext) -> Result<CheckOutput>,
}

impl LemmaCheck for FnCheck {
    fn id(&self) -> &'static str {
        self.id
    }

    fn run(&self, ctx: &CheckContext) -> Result<CheckOutput> {
        (self.f)(ctx)
    }
}

/// Checks keyed by lemma id.
pub struct CheckRegistry {
    checks: BTreeMap<&'static str, Box<dyn LemmaCheck>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        CheckRegistry {
            checks: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        use CheckOutput::Scaling;
        let mut r = Self::empty();
        let builtins: [(&'static str, CheckFn); 8] = [
            ("descent", |c| {
                let obj = c.objective("descent")?;
                let rep = check_descent(
                    &**obj,
                    &Region::Global,
                    c.n_samples,
                    c.eta,
                    &mut seeded(c.seed),
                    c.control,
                )?;
                Ok(Scaling(rep))
            }),
            ("two-step", |c| {
                Ok(Scaling(check_two_step(
                    &*c.manifold,
                    c.n_samples,
                    &c.scales,
                    &mut seeded(c.seed),
                    c.control,
                )?))
            }),
            ("log-bilipschitz", |c| {
                let rep = check_log_bilipschitz(&*c.manifold, c.n_samples, &c.radii, &mut seeded(c.seed), c.control)?;
                Ok(Scaling(rep))
            }),
            ("transport-contraction", |c| {
                let rep =
                    check_transport_contraction(&*c.manifold, c.n_samples, &c.scales, &mut seeded(c.seed), c.control)?;
                Ok(Scaling(rep))
            }),
            ("holonomy", |c| {
                Ok(Scaling(check_holonomy(
                    &*c.manifold,
                    c.n_samples,
                    &c.scales,
                    &mut seeded(c.seed),
                    c.control,
                )?))
            }),
            ("linearization", |c| {
                let obj = c.objective("linearization")?;
                let x = c.saddle("linearization")?;
                let rep =
                    check_linearization(&**obj, x, c.n_samples, &c.scales, c.eta, &mut seeded(c.seed), c.control)?;
                Ok(Scaling(rep))
            }),
            ("gradient-taylor", |c| {
                let obj = c.objective("gradient-taylor")?;
                let rep = check_gradient_taylor(&**obj, c.n_samples, &c.scales, &mut seeded(c.seed), c.control)?;
                Ok(Scaling(rep))
            }),
            ("coupling", |c| {
                let obj = c.objective("coupling")?;
                let x = c.saddle("coupling")?;
                let thr = c
                    .thresholds
                    .as_ref()
                    .ok_or_else(|| Error::invalid("check coupling needs thresholds"))?;
                Ok(CheckOutput::Coupling(coupling_probe(
                    &**obj,
                    x,
                    thr,
                    c.mu,
                    c.t_max,
                    &mut seeded(c.seed),
                )?))
            }),
        ];
        for (id, f) in builtins {
            r.register(Box::new(FnCheck { id, f }));
        }
        r
    }

    /// Replaces any check with the same id.
    pub fn register(&mut self, check: Box<dyn LemmaCheck>) {
        self.checks.insert(check.id(), check);
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.checks.keys().copied().collect()
    }

    pub fn get(&self, id: &str) -> Option<&dyn LemmaCheck> {
        self.checks.get(id).map(|c| &**c)
    }

    pub fn run(&self, id: &str, ctx: &CheckContext) -> Result<CheckOutput> {
        let check = self
            .get(id)
            .ok_or_else(|| Error::invalid(format!("unknown check {id:?}; known: {}", self.ids().join(", "))))?;
        check.run(ctx)
    }
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
