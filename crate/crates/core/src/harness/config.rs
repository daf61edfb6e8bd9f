use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::manifold::ManifoldSpec;
use crate::optimizer::Mode;

/// Which experiment a config describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    SphereQuadratic,
    Kpca,
    BurerMonteiro,
    Verify,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::SphereQuadratic => "sphere-quadratic",
            ExperimentKind::Kpca => "kpca",
            ExperimentKind::BurerMonteiro => "burer-monteiro",
            ExperimentKind::Verify => "verify",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "sphere-quadratic" => ExperimentKind::SphereQuadratic,
            "kpca" => ExperimentKind::Kpca,
            "burer-monteiro" => ExperimentKind::BurerMonteiro,
            "verify" => ExperimentKind::Verify,
            _ => return Err("expected sphere-quadratic, kpca, burer-monteiro or verify".into()),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Problem data. Paths are resolved against the config file's directory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemConfig {
    pub manifold: Option<ManifoldSpec>,
    pub diag: Option<Vec<f64>>,
    pub matrix_file: Option<PathBuf>,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub p: Option<usize>,
    pub block: Option<usize>,
    pub start: Option<Vec<f64>>,
    /// One-based indices of the standard basis vectors forming the start frame.
    pub start_columns: Option<Vec<usize>>,
    pub start_file: Option<PathBuf>,
}

/// Accuracy targets, smoothness constants and practical overrides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ThresholdConfig {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub rho_hat: Option<f64>,
    pub f_gap: Option<f64>,
    pub eta: Option<f64>,
    pub r: Option<f64>,
    pub g_thres: Option<f64>,
    pub t_thres: Option<u64>,
    pub f_thres: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyConfig {
    pub checks: Option<Vec<String>>,
    pub n_samples: Option<usize>,
    pub scales: Option<Vec<f64>>,
    pub radii: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub mu: Option<f64>,
    pub t_max: Option<usize>,
    pub falsify: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub mode: Mode,
    pub seed: u64,
    pub max_iters: u64,
    pub out: PathBuf,
    pub c_hat: f64,
    /// Tolerance of the smallest-eigenvalue audit.
    pub eig_tol: f64,
    pub problem: ProblemConfig,
    pub thresholds: ThresholdConfig,
    pub verify: VerifyConfig,
}

/// One problem found while parsing; `line` is absent for missing fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "run",
        &["experiment", "mode", "seed", "max_iters", "out", "c_hat", "eig_tol"],
    ),
    (
        "problem",
        &[
            "manifold",
            "curvature",
            "injectivity",
            "diag",
            "matrix_file",
            "k",
            "d",
            "p",
            "block",
            "start",
            "start_columns",
            "start_file",
        ],
    ),
    (
        "thresholds",
        &[
            "epsilon", "delta", "beta", "rho", "rho_hat", "f_gap", "eta", "r", "g_thres", "t_thres", "f_thres",
        ],
    ),
    (
        "verify",
        &[
            "checks",
            "n_samples",
            "scales",
            "radii",
            "eta",
            "mu",
            "t_max",
            "falsify",
        ],
    ),
];

struct Raw {
    values: BTreeMap<(&'static str, &'static str), (String, usize)>,
    issues: Vec<ConfigIssue>,
    base: PathBuf,
}

impl Raw {
    fn issue(&mut self, line: Option<usize>, message: String) {
        self.issues.push(ConfigIssue { line, message });
    }

    fn get<T>(
        &mut self,
        section: &'static str,
        key: &'static str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Option<T> {
        let (v, line) = self.values.get(&(section, key))?.clone();
        match parse(&v) {
            Some(t) => Some(t),
            None => {
                self.issue(Some(line), format!("[{section}] {key}: expected {what}, got {v:?}"));
                None
            }
        }
    }

    fn scalar<T: FromStr>(&mut self, section: &'static str, key: &'static str, what: &str) -> Option<T> {
        self.get(section, key, what, |s| s.parse().ok())
    }

    fn positive(&mut self, section: &'static str, key: &'static str) -> Option<f64> {
        self.get(section, key, "a positive number", |s| {
            s.parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite())
        })
    }

    fn count(&mut self, section: &'static str, key: &'static str) -> Option<usize> {
        self.get(section, key, "a positive integer", |s| {
            s.parse::<usize>().ok().filter(|v| *v > 0)
        })
    }

    fn list<T: FromStr>(&mut self, section: &'static str, key: &'static str, what: &str) -> Option<Vec<T>> {
        self.get(section, key, what, |s| {
            let items: Option<Vec<T>> = s
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().ok())
                .collect();
            items.filter(|v| !v.is_empty())
        })
    }

    fn path(&mut self, section: &'static str, key: &'static str) -> Option<PathBuf> {
        let base = self.base.clone();
        self.get(section, key, "a path", |s| Some(base.join(s)))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parse the `key = value` config format. Keys before any `[section]` header
/// belong to `[run]`. `#` starts a comment. Relative paths resolve against
/// `base`. Every problem is reported, each with its line number when it has one.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig, ConfigErrors> {
    let mut raw = Raw {
        values: BTreeMap::new(),
        issues: Vec::new(),
        base: base.to_path_buf(),
    };
    let mut section: Option<(&'static str, &'static [&'static str])> = Some(SECTIONS[0]);
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = strip_comment(line).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = SECTIONS.iter().copied().find(|(s, _)| *s == name.trim());
            if section.is_none() {
                raw.issue(Some(n), format!("unknown section [{}]", name.trim()));
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            raw.issue(Some(n), format!("expected `key = value`, got {line:?}"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        let Some((sname, keys)) = section else {
            continue;
        };
        let Some(key) = keys.iter().copied().find(|x| *x == k) else {
            raw.issue(Some(n), format!("unknown key {k:?} in [{sname}]"));
            continue;
        };
        if v.is_empty() {
            raw.issue(Some(n), format!("[{sname}] {key} has no value"));
            continue;
        }
        if let Some((_, first)) = raw.values.get(&(sname, key)) {
            let first = *first;
            raw.issue(Some(n), format!("[{sname}] {key} already set on line {first}"));
            continue;
        }
        raw.values.insert((sname, key), (v.to_string(), n));
    }

    let experiment = raw.get("run", "experiment", "an experiment name", |s| s.parse().ok());
    let seed: Option<u64> = raw.scalar("run", "seed", "a 64-bit unsigned integer");
    let mode = raw
        .get("run", "mode", "theory or practical", |s| match s {
            "theory" => Some(Mode::Theory),
            "practical" => Some(Mode::Practical),
            _ => None,
        })
        .unwrap_or(Mode::Practical);
    let max_iters = raw
        .get("run", "max_iters", "a positive integer", |s| {
            s.parse::<u64>().ok().filter(|v| *v > 0)
        })
        .unwrap_or(100_000);
    let out = raw.path("run", "out").unwrap_or_else(|| base.join("out"));
    let c_hat = raw
        .get("run", "c_hat", "a number at least 4", |s| {
            s.parse::<f64>().ok().filter(|v| *v >= 4.0)
        })
        .unwrap_or(4.0);
    let eig_tol = raw.positive("run", "eig_tol").unwrap_or(1e-6);

    let mut manifold: Option<ManifoldSpec> = raw.get("problem", "manifold", "a manifold such as sphere(3)", |s| {
        s.parse().ok()
    });
    let curvature = raw.get("problem", "curvature", "a nonnegative number", |s| {
        s.parse::<f64>().ok().filter(|v| *v >= 0.0 && v.is_finite())
    });
    let injectivity = raw.get("problem", "injectivity", "a positive number or inf", |s| {
        s.parse::<f64>().ok().filter(|v| *v > 0.0)
    });
    match (&mut manifold, curvature, injectivity) {
        (Some(m), Some(c), Some(i)) => m.geometry = Some((c, i)),
        (_, None, None) => {}
        _ => raw.issue(
            None,
            "[problem] curvature and injectivity must be given together, along with manifold".into(),
        ),
    }
    let problem = ProblemConfig {
        manifold,
        diag: raw.list("problem", "diag", "a list of numbers"),
        matrix_file: raw.path("problem", "matrix_file"),
        k: raw.count("problem", "k"),
        d: raw.count("problem", "d"),
        p: raw.count("problem", "p"),
        block: raw.count("problem", "block"),
        start: raw.list("problem", "start", "a list of numbers"),
        start_columns: raw.list("problem", "start_columns", "a list of positive integers"),
        start_file: raw.path("problem", "start_file"),
    };
    let thresholds = ThresholdConfig {
        epsilon: raw.positive("thresholds", "epsilon"),
        delta: raw.get("thresholds", "delta", "a number in (0,1)", |s| {
            s.parse::<f64>().ok().filter(|v| *v > 0.0 && *v < 1.0)
        }),
        beta: raw.positive("thresholds", "beta"),
        rho: raw.positive("thresholds", "rho"),
        rho_hat: raw.positive("thresholds", "rho_hat"),
        f_gap: raw.positive("thresholds", "f_gap"),
        eta: raw.positive("thresholds", "eta"),
        r: raw.positive("thresholds", "r"),
        g_thres: raw.positive("thresholds", "g_thres"),
        t_thres: raw.get("thresholds", "t_thres", "a positive integer", |s| {
            s.parse::<u64>().ok().filter(|v| *v > 0)
        }),
        f_thres: raw.positive("thresholds", "f_thres"),
    };
    let verify = VerifyConfig {
        checks: raw.list("verify", "checks", "a list of check ids"),
        n_samples: raw.count("verify", "n_samples"),
        scales: raw.list("verify", "scales", "a list of numbers"),
        radii: raw.list("verify", "radii", "a list of numbers"),
        eta: raw.positive("verify", "eta"),
        mu: raw.get("verify", "mu", "a nonnegative number", |s| {
            s.parse::<f64>().ok().filter(|v| *v >= 0.0 && v.is_finite())
        }),
        t_max: raw.count("verify", "t_max"),
        falsify: raw.scalar("verify", "falsify", "true or false").unwrap_or(false),
    };

    let missing = |raw: &mut Raw, section: &str, key: &str, why: &str| {
        raw.issue(None, format!("missing required field [{section}] {key}{why}"));
    };
    if !raw.values.contains_key(&("run", "experiment")) {
        missing(&mut raw, "run", "experiment", "");
    }
    if !raw.values.contains_key(&("run", "seed")) {
        missing(&mut raw, "run", "seed", "");
    }
    if let Some(kind) = experiment {
        let has = |raw: &Raw, s, k| raw.values.contains_key(&(s, k));
        match kind {
            ExperimentKind::Kpca => {
                if !has(&raw, "problem", "k") {
                    missing(&mut raw, "problem", "k", " for kpca");
                }
                if !has(&raw, "problem", "diag") && !has(&raw, "problem", "matrix_file") {
                    missing(&mut raw, "problem", "diag or matrix_file", " for kpca");
                }
            }
            ExperimentKind::SphereQuadratic => {
                if !has(&raw, "problem", "diag") {
                    missing(&mut raw, "problem", "diag", " for sphere-quadratic");
                }
            }
            ExperimentKind::BurerMonteiro | ExperimentKind::Verify => {}
        }
        if kind != ExperimentKind::Verify && !has(&raw, "thresholds", "epsilon") {
            missing(&mut raw, "thresholds", "epsilon", "");
        }
        if mode == Mode::Theory && kind != ExperimentKind::Verify && !has(&raw, "thresholds", "f_gap") {
            missing(&mut raw, "thresholds", "f_gap", " in theory mode");
        }
    }

    if !raw.issues.is_empty() {
        raw.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(raw.issues));
    }
    Ok(ExperimentConfig {
        experiment: experiment.expect("checked above"),
        mode,
        seed: seed.expect("checked above"),
        max_iters,
        out,
        c_hat,
        eig_tol,
        problem,
        thresholds,
        verify,
    })
}
