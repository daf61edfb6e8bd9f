use std::collections::BTreeMap;
use std::sync::Arc;

use super::{BurerMonteiro, Kpca, Linear, Quadratic, SharedObjective};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::SharedManifold;

/// Problem data handed to an objective builder.
#[derive(Clone, Debug, Default)]
pub struct ObjectiveData {
    pub diag: Option<Vec<f64>>,
    pub matrix: Option<Mat>,
}

pub type ObjectiveBuilder = fn(SharedManifold, &ObjectiveData) -> Result<SharedObjective>;

pub struct ObjectiveRegistry {
    builders: BTreeMap<&'static str, ObjectiveBuilder>,
}

fn need<'a, T>(v: &'a Option<T>, what: &str, kind: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::invalid(format!("{kind} objective needs {what}")))
}

fn build_quadratic(m: SharedManifold, d: &ObjectiveData) -> Result<SharedObjective> {
    let diag = need(&d.diag, "a diagonal", "sphere-quadratic")?;
    Ok(Arc::new(Quadratic::new(diag.clone(), m)?))
}

fn build_kpca(m: SharedManifold, d: &ObjectiveData) -> Result<SharedObjective> {
    let h = match (&d.matrix, &d.diag) {
        (Some(h), _) => h.clone(),
        (None, Some(diag)) => Mat::from_diagonal(&nalgebra::DVector::from_vec(diag.clone())),
        (None, None) => return Err(Error::invalid("kpca objective needs H")),
    };
    Ok(Arc::new(Kpca::new(h, m)?))
}

fn build_burer_monteiro(m: SharedManifold, d: &ObjectiveData) -> Result<SharedObjective> {
    let a = need(&d.matrix, "A", "burer-monteiro")?;
    Ok(Arc::new(BurerMonteiro::new(a.clone(), m)?))
}

fn build_linear(m: SharedManifold, d: &ObjectiveData) -> Result<SharedObjective> {
    let c = match (&d.matrix, &d.diag) {
        (Some(c), _) => c.clone(),
        (None, Some(v)) => Mat::from_column_slice(v.len(), 1, v),
        (None, None) => return Err(Error::invalid("linear objective needs coefficients")),
    };
    Ok(Arc::new(Linear::new(c, m)?))
}

impl ObjectiveRegistry {
    pub fn empty() -> Self {
        ObjectiveRegistry {
            builders: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("sphere-quadratic", build_quadratic);
        r.register("kpca", build_kpca);
        r.register("burer-monteiro", build_burer_monteiro);
        r.register("linear", build_linear);
        r
    }

    pub fn register(&mut self, name: &'static str, builder: ObjectiveBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }

    pub fn build(&self, kind: &str, manifold: SharedManifold, data: &ObjectiveData) -> Result<SharedObjective> {
        let b = self
            .builders
            .get(kind)
            .ok_or_else(|| Error::invalid(format!("unknown objective `{kind}`")))?;
        b(manifold, data)
    }
}

impl Default for ObjectiveRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
