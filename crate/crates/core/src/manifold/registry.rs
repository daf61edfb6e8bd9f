use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{Euclidean, Grassmann, Oblique, SharedManifold, Sphere, Stiefel};
use crate::error::{Error, Result};

/// Parsed manifold descriptor such as `sphere(3)` or `grassmann(5,3)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldSpec {
    pub kind: String,
    pub dims: Vec<usize>,
    /// Optional `(curvature_bound, injectivity_radius)` override.
    pub geometry: Option<(f64, f64)>,
}

impl ManifoldSpec {
    pub fn new(kind: &str, dims: &[usize]) -> Self {
        ManifoldSpec {
            kind: kind.to_string(),
            dims: dims.to_vec(),
            geometry: None,
        }
    }
}

impl FromStr for ManifoldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::invalid(format!("manifold `{s}`: expected kind(dims)")))?;
        if !s.ends_with(')') {
            return Err(Error::invalid(format!("manifold `{s}`: missing `)`")));
        }
        let kind = s[..open].trim().to_ascii_lowercase();
        let dims = s[open + 1..s.len() - 1]
            .split(',')
            .map(|d| {
                d.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("manifold `{s}`: bad dimension `{}`", d.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ManifoldSpec {
            kind,
            dims,
            geometry: None,
        })
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "{}({})", self.kind, dims.join(","))
    }
}

pub type ManifoldBuilder = fn(&ManifoldSpec) -> Result<SharedManifold>;

/// Name → constructor table for the manifold families.
pub struct ManifoldRegistry {
    builders: BTreeMap<&'static str, ManifoldBuilder>,
}

fn dims<const N: usize>(spec: &ManifoldSpec) -> Result<[usize; N]> {
    spec.dims
        .as_slice()
        .try_into()
        .map_err(|_| Error::invalid(format!("{} takes {N} dimension(s), got {}", spec.kind, spec.dims.len())))
}

fn no_override(spec: &ManifoldSpec) -> Result<()> {
    match spec.geometry {
        Some(_) => Err(Error::invalid(format!(
            "{} has exact curvature data; geometry overrides are not accepted",
            spec.kind
        ))),
        None => Ok(()),
    }
}

fn build_sphere(spec: &ManifoldSpec) -> Result<SharedManifold> {
    no_override(spec)?;
    let [n] = dims::<1>(spec)?;
    Ok(Arc::new(Sphere::new(n)?))
}

fn build_euclidean(spec: &ManifoldSpec) -> Result<SharedManifold> {
    no_override(spec)?;
    let [n] = dims::<1>(spec)?;
    Ok(Arc::new(Euclidean::new(n)?))
}

fn build_oblique(spec: &ManifoldSpec) -> Result<SharedManifold> {
    no_override(spec)?;
    let [d, p] = dims::<2>(spec)?;
    Ok(Arc::new(Oblique::new(d, p)?))
}

fn build_grassmann(spec: &ManifoldSpec) -> Result<SharedManifold> {
    let [n, k] = dims::<2>(spec)?;
    let mut g = Grassmann::new(n, k)?;
    if let Some((c, i)) = spec.geometry {
        g = g.with_geometry(c, i);
    }
    Ok(Arc::new(g))
}

fn build_stiefel(spec: &ManifoldSpec) -> Result<SharedManifold> {
    let [n, k] = dims::<2>(spec)?;
    let mut s = Stiefel::new(n, k)?;
    if let Some((c, i)) = spec.geometry {
        s = s.with_geometry(c, i);
    }
    Ok(Arc::new(s))
}

impl ManifoldRegistry {
    pub fn empty() -> Self {
        ManifoldRegistry {
            builders: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("sphere", build_sphere);
        r.register("euclidean", build_euclidean);
        r.register("oblique", build_oblique);
        r.register("grassmann", build_grassmann);
        r.register("stiefel", build_stiefel);
        r
    }

    pub fn register(&mut self, name: &'static str, builder: ManifoldBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }

    pub fn build(&self, spec: &ManifoldSpec) -> Result<SharedManifold> {
        let builder = self.builders.get(spec.kind.as_str()).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::invalid(format!(
                "unknown manifold `{}` (known: {})",
                spec.kind,
                known.join(", ")
            ))
        })?;
        builder(spec)
    }

    pub fn build_str(&self, s: &str) -> Result<SharedManifold> {
        self.build(&s.parse()?)
    }
}

impl Default for ManifoldRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_every_family() {
        let r = ManifoldRegistry::with_builtins();
        for s in [
            "sphere(3)",
            "euclidean(4)",
            "oblique(3,2)",
            "grassmann(5,3)",
            "stiefel(4,2)",
        ] {
            let m = r.build_str(s).unwrap();
            assert_eq!(m.id().as_str(), s);
        }
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let r = ManifoldRegistry::with_builtins();
        assert!(r.build_str("torus(2)").is_err());
        assert!(r.build_str("sphere(3,4)").is_err());
        assert!(r.build_str("sphere3").is_err());
    }

    #[test]
    fn exact_geometry_is_reported() {
        let r = ManifoldRegistry::with_builtins();
        let s = r.build_str("sphere(3)").unwrap().geometry();
        assert_eq!(
            (s.curvature_bound, s.injectivity_radius, s.dimension),
            (1.0, std::f64::consts::PI, 2)
        );
        let o = r.build_str("oblique(4,3)").unwrap().geometry();
        assert_eq!(
            (o.curvature_bound, o.injectivity_radius, o.dimension),
            (1.0, std::f64::consts::PI, 8)
        );
        let e = r.build_str("euclidean(3)").unwrap().geometry();
        assert_eq!(e.curvature_bound, 0.0);
        assert!(e.injectivity_radius.is_infinite());
    }

    #[test]
    fn grassmann_geometry_override() {
        let r = ManifoldRegistry::with_builtins();
        let mut spec: ManifoldSpec = "grassmann(5,3)".parse().unwrap();
        spec.geometry = Some((2.0, 1.0));
        assert_eq!(r.build(&spec).unwrap().geometry().injectivity_radius, 1.0);
    }
}
