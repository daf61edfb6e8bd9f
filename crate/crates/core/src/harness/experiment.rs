use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DVector, SymmetricEigen};
use rand::Rng;

use super::config::{parse_config, ExperimentConfig, ExperimentKind};
use super::matrix_io::{fmt_float, read_matrix};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::{ManifoldRegistry, ManifoldSpec, Point, SharedManifold};
use crate::objective::{
    estimate_smoothness, min_hess_eig, min_hess_eig_with, ObjectiveData, ObjectiveRegistry, SharedObjective,
};
use crate::optimizer::{
    classify_stationarity, derive_thresholds, epsilon_bound, practical_thresholds, run, AssumptionParams, Derivation,
    Mode, PracticalOverrides, RunResult, RunStatus, Stationarity,
};
use crate::rng::substream;
use crate::verify::{check_log_bilipschitz, CheckContext, CheckRegistry, Control};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Start points further than this from the manifold are rejected.
const START_FEASIBILITY_TOL: f64 = 1e-8;

const OPTIMIZER_STREAM: u64 = 0;
const AUDIT_STREAM: u64 = 1;
const DATA_STREAM: u64 = 2;

const DEFAULT_SCALES: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
const DEFAULT_RADII: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// A config resolved into concrete problem data and thresholds.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub manifold: SharedManifold,
    pub objective: SharedObjective,
    pub x0: Point,
    pub params: AssumptionParams,
    pub derivation: Derivation,
    /// Where `beta` came from: `config`, `bound` or `estimate`.
    pub beta_source: &'static str,
}

/// Read and parse a config file; relative paths inside it resolve against its directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|e| Error::invalid(format!("{}:\n{e}", path.display())))
}

fn standard_basis(n: usize, cols: &[usize]) -> Result<Mat> {
    let mut m = Mat::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        if i == 0 || i > n {
            return Err(Error::invalid(format!("basis index {i} outside 1..={n}")));
        }
        m[(i - 1, j)] = 1.0;
    }
    Ok(m)
}

/// Rows `5j−4..5j` (one-based) carry a 1 in column `j`.
pub fn bm_start(d: usize, p: usize) -> Result<Mat> {
    if d > 5 * p {
        return Err(Error::invalid(format!(
            "the start pattern needs d ≤ 5p, got d = {d}, p = {p}"
        )));
    }
    let mut y = Mat::zeros(d, p);
    for i in 0..d {
        y[(i, i / 5)] = 1.0;
    }
    Ok(y)
}

fn bm_matrix(d: usize, block: usize, seed: u64) -> Result<Mat> {
    if block > d {
        return Err(Error::invalid(format!("block {block} larger than d = {d}")));
    }
    // Uniform nonnegative entries keep Y₀ a strict saddle for every draw: on the
    // coincident block rows the Hessian is −(graph Laplacian of the block),
    // while Gaussian entries can make it positive semidefinite.
    let mut rng = substream(seed, DATA_STREAM);
    let g = Mat::from_fn(block, block, |_, _| rng.gen::<f64>());
    let mut a = Mat::zeros(d, d);
    a.view_mut((0, 0), (block, block))
        .copy_from(&((&g + g.transpose()) * 0.5));
    Ok(a)
}

fn build_manifold(spec: &ManifoldSpec) -> Result<SharedManifold> {
    ManifoldRegistry::with_builtins().build(spec)
}

fn start_point(cfg: &ExperimentConfig, m: &SharedManifold, default: Mat) -> Result<Point> {
    let p = &cfg.problem;
    let (rows, cols) = m.shape();
    let coords = if let Some(path) = &p.start_file {
        read_matrix(path)?
    } else if let Some(v) = &p.start {
        if cols != 1 {
            return Err(Error::invalid(
                "[problem] start is a vector; use start_file for matrix manifolds",
            ));
        }
        Mat::from_column_slice(v.len(), 1, v)
    } else if let Some(c) = &p.start_columns {
        standard_basis(rows, c)?
    } else {
        default
    };
    m.point_with_tol(coords, START_FEASIBILITY_TOL)
}

fn problem(cfg: &ExperimentConfig) -> Result<(SharedManifold, SharedObjective, Point)> {
    let p = &cfg.problem;
    let objectives = ObjectiveRegistry::with_builtins();
    let diag_matrix = |d: &Vec<f64>| Mat::from_diagonal(&DVector::from_vec(d.clone()));
    match cfg.experiment {
        ExperimentKind::SphereQuadratic | ExperimentKind::Verify => {
            let diag = p.diag.clone().unwrap_or_else(|| vec![1.0, -1.0, 4.0]);
            let spec = p
                .manifold
                .clone()
                .unwrap_or_else(|| ManifoldSpec::new("sphere", &[diag.len()]));
            let m = build_manifold(&spec)?;
            let data = ObjectiveData {
                diag: Some(diag.clone()),
                matrix: None,
            };
            let obj = objectives.build("sphere-quadratic", m.clone(), &data)?;
            let mut e1 = Mat::zeros(diag.len(), 1);
            e1[0] = 1.0;
            let x0 = start_point(cfg, &m, e1)?;
            Ok((m, obj, x0))
        }
        ExperimentKind::Kpca => {
            let h = match (&p.matrix_file, &p.diag) {
                (Some(f), _) => read_matrix(f)?,
                (None, Some(d)) => diag_matrix(d),
                (None, None) => return Err(Error::invalid("kpca needs [problem] diag or matrix_file")),
            };
            let n = h.nrows();
            let k = p.k.ok_or_else(|| Error::invalid("kpca needs [problem] k"))?;
            if k >= n {
                return Err(Error::invalid(format!("kpca needs k < n, got k = {k}, n = {n}")));
            }
            let spec = p
                .manifold
                .clone()
                .unwrap_or_else(|| ManifoldSpec::new("grassmann", &[n, k]));
            let m = build_manifold(&spec)?;
            let data = ObjectiveData {
                diag: None,
                matrix: Some(h),
            };
            let obj = objectives.build("kpca", m.clone(), &data)?;
            let cols: Vec<usize> = (2..=k + 1).collect();
            let x0 = start_point(cfg, &m, standard_basis(n, &cols)?)?;
            Ok((m, obj, x0))
        }
        ExperimentKind::BurerMonteiro => {
            let d = p.d.unwrap_or(100);
            let pp = p.p.unwrap_or(20);
            let a = match &p.matrix_file {
                Some(f) => read_matrix(f)?,
                None => bm_matrix(d, p.block.unwrap_or(5), cfg.seed)?,
            };
            let spec = p
                .manifold
                .clone()
                .unwrap_or_else(|| ManifoldSpec::new("oblique", &[d, pp]));
            let m = build_manifold(&spec)?;
            let data = ObjectiveData {
                diag: None,
                matrix: Some(a),
            };
            let obj = objectives.build("burer-monteiro", m.clone(), &data)?;
            let (rows, cols) = m.shape();
            let x0 = start_point(cfg, &m, bm_start(rows, cols)?)?;
            Ok((m, obj, x0))
        }
    }
}

/// Resolve the manifold, objective, start point and thresholds of a config.
///
/// `beta` falls back to the objective's own Lipschitz bound, then to a sampled
/// estimate around the start point; `rho` falls back to `beta` and `rho_hat`
/// to `rho`.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let (m, obj, x0) = problem(cfg)?;
    let t = &cfg.thresholds;
    let geo = m.geometry();
    let (beta, beta_source) = match (t.beta, obj.lipschitz_bound()) {
        (Some(b), _) => (b, "config"),
        (None, Some(b)) if b > 0.0 => (b, "bound"),
        _ => {
            let radius = (0.5 * geo.injectivity_radius).min(1.0);
            let est = estimate_smoothness(&*obj, &x0, radius, 32, &mut substream(cfg.seed, AUDIT_STREAM))?;
            (est.beta_hat.max(f64::MIN_POSITIVE), "estimate")
        }
    };
    let rho = t.rho.unwrap_or(beta);
    let params = AssumptionParams {
        beta,
        rho,
        curvature_k: geo.curvature_bound,
        injectivity: geo.injectivity_radius,
        epsilon: t.epsilon.unwrap_or(1e-4),
        delta: t.delta.unwrap_or(0.1),
        f_gap: t.f_gap.unwrap_or(1.0),
        dim_d: geo.dimension,
        rho_hat: t.rho_hat.unwrap_or(rho),
    };
    let derivation = match cfg.mode {
        Mode::Theory => derive_thresholds(&params, cfg.c_hat)?,
        Mode::Practical => {
            let o = PracticalOverrides {
                eta: t.eta,
                r: t.r,
                g_thres: t.g_thres,
                t_thres: t.t_thres,
                f_thres: t.f_thres,
            };
            practical_thresholds(&params, cfg.c_hat, &o)?
        }
    };
    Ok(Prepared {
        manifold: m,
        objective: obj,
        x0,
        params,
        derivation,
        beta_source,
    })
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn trace_csv(res: &RunResult) -> String {
    let mut s = String::from("t,f,gradnorm,step_norm,perturbed,dist_to_start\n");
    for r in &res.trace.rows {
        let d = r.dist_to_start.map(fmt_float).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.t,
            fmt_float(r.f),
            fmt_float(r.gradnorm),
            fmt_float(r.step_norm),
            u8::from(r.perturbed),
            d
        );
    }
    s
}

/// Principal angles between the column spans of two orthonormal frames, largest first.
pub fn principal_angles(a: &Mat, b: &Mat) -> Vec<f64> {
    let sv = (a.transpose() * b).singular_values();
    let mut angles: Vec<f64> = sv.iter().map(|s| s.clamp(-1.0, 1.0).acos()).collect();
    angles.sort_by(|x, y| y.total_cmp(x));
    angles
}

fn top_eigvecs(h: &Mat, k: usize) -> (Mat, f64) {
    let eig = SymmetricEigen::new(h.clone());
    let mut idx: Vec<usize> = (0..h.nrows()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut v = Mat::zeros(h.nrows(), k);
    let mut sum = 0.0;
    for (c, &i) in idx.iter().take(k).enumerate() {
        v.set_column(c, &eig.eigenvectors.column(i));
        sum += eig.eigenvalues[i];
    }
    (v, -0.5 * sum)
}

fn kv(s: &mut String, k: &str, v: impl std::fmt::Display) {
    let _ = writeln!(s, "{k} = {v}");
}

fn experiment_metrics(cfg: &ExperimentConfig, prep: &Prepared, res: &RunResult, s: &mut String) -> Result<()> {
    let m = &prep.manifold;
    match cfg.experiment {
        ExperimentKind::SphereQuadratic => {
            let diag = cfg.problem.diag.as_deref().unwrap_or(&[]);
            let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
            if m.kind() == "sphere" && diag.iter().filter(|d| **d == min).count() == 1 {
                let i = diag.iter().position(|d| *d == min).unwrap();
                let mut e = Mat::zeros(diag.len(), 1);
                e[i] = 1.0;
                let plus = m.point(e.clone())?;
                let minus = m.point(-e)?;
                let d = m.dist(&res.final_point, &plus)?.min(m.dist(&res.final_point, &minus)?);
                kv(s, "f_optimal", fmt_float(min));
                kv(s, "dist_to_minimizer", fmt_float(d));
            }
        }
        ExperimentKind::Kpca => {
            let h = match (&cfg.problem.matrix_file, &cfg.problem.diag) {
                (Some(f), _) => read_matrix(f)?,
                (None, Some(d)) => Mat::from_diagonal(&DVector::from_vec(d.clone())),
                _ => unreachable!("validated in prepare"),
            };
            let k = res.final_point.coords().ncols();
            let (v, f_opt) = top_eigvecs(&h, k);
            let angles = principal_angles(&v, res.final_point.coords());
            kv(s, "f_optimal", fmt_float(f_opt));
            kv(s, "max_principal_angle", fmt_float(angles[0]));
        }
        ExperimentKind::BurerMonteiro => {
            let f0 = prep.objective.value(&prep.x0)?;
            kv(s, "f_decrease", fmt_float(f0 - res.final_f));
        }
        ExperimentKind::Verify => {}
    }
    Ok(())
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Run one optimisation experiment and write `trace.csv` and `summary.txt` to
/// `cfg.out`. Verify configs are delegated to [`run_verify`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.experiment == ExperimentKind::Verify {
        return run_verify(cfg);
    }
    let prep = prepare(cfg)?;
    create_out(&cfg.out)?;
    let obj = &*prep.objective;
    let thr = &prep.derivation.thresholds;
    let f_start = obj.value(&prep.x0)?;
    let g_start = obj.rgrad(&prep.x0)?.norm();
    let feas = prep.manifold.feasibility_residual(prep.x0.coords());

    let mut res = run(
        obj,
        &prep.x0,
        thr,
        cfg.max_iters,
        &mut substream(cfg.seed, OPTIMIZER_STREAM),
    )?;
    let mut audit_rng = substream(cfg.seed, AUDIT_STREAM);
    let eig = if res.status == RunStatus::StepFailure {
        None
    } else if obj.has_exact_hessian() {
        let x = &res.final_point;
        Some(min_hess_eig_with(obj, x, cfg.eig_tol, &mut audit_rng, &|v| {
            obj.exact_hess_vec(x, v)
        })?)
    } else {
        Some(min_hess_eig(obj, &res.final_point, cfg.eig_tol, &mut audit_rng)?)
    };
    res.final_lambda_min = eig.as_ref().map(|e| e.lambda_min);
    let class = eig.as_ref().map(|e| {
        classify_stationarity(
            res.final_gradnorm,
            e.lambda_min,
            prep.params.epsilon,
            prep.params.rho_hat,
        )
    });

    let mut s = String::new();
    kv(&mut s, "experiment", cfg.experiment);
    kv(&mut s, "manifold", prep.manifold.id());
    kv(&mut s, "mode", cfg.mode);
    kv(&mut s, "seed", cfg.seed);
    kv(&mut s, "status", res.status);
    kv(&mut s, "classification", class.map_or("unknown", |c| c.as_str()));
    kv(&mut s, "iterations", res.iterations);
    kv(&mut s, "final_f", fmt_float(res.final_f));
    kv(&mut s, "final_gradnorm", fmt_float(res.final_gradnorm));
    kv(
        &mut s,
        "lambda_min",
        res.final_lambda_min.map_or("none".into(), fmt_float),
    );
    kv(&mut s, "lambda_converged", eig.as_ref().is_some_and(|e| e.converged));
    kv(&mut s, "start_f", fmt_float(f_start));
    kv(&mut s, "start_gradnorm", fmt_float(g_start));
    kv(&mut s, "start_feasibility", fmt_float(feas));
    experiment_metrics(cfg, &prep, &res, &mut s)?;
    if let Some(msg) = &res.message {
        kv(&mut s, "message", msg);
    }
    write_params(&mut s, &prep);

    let trace_path = cfg.out.join("trace.csv");
    let summary_path = cfg.out.join("summary.txt");
    write_file(&trace_path, &trace_csv(&res))?;
    write_file(&summary_path, &s)?;
    let ok = res.status == RunStatus::SecondOrderPoint && class == Some(Stationarity::SecondOrder);
    Ok(Outcome {
        exit_code: if ok { EXIT_OK } else { EXIT_NOT_CONVERGED },
        summary: s,
        files: vec![trace_path, summary_path],
    })
}

fn write_params(s: &mut String, prep: &Prepared) {
    let p = &prep.params;
    kv(s, "beta_source", prep.beta_source);
    for (k, v) in [
        ("beta", p.beta),
        ("rho", p.rho),
        ("rho_hat", p.rho_hat),
        ("curvature_k", p.curvature_k),
        ("injectivity", p.injectivity),
        ("epsilon", p.epsilon),
        ("delta", p.delta),
        ("f_gap", p.f_gap),
    ] {
        kv(s, k, fmt_float(v));
    }
    kv(s, "dim_d", p.dim_d);
    for (k, v) in prep.derivation.thresholds.fields() {
        if k == "t_thres" {
            kv(s, "thr.t_thres", prep.derivation.thresholds.t_thres);
        } else {
            kv(s, &format!("thr.{k}"), fmt_float(v));
        }
    }
    for w in &prep.derivation.warnings {
        kv(s, "warning", w);
    }
}

/// Run the lemma checks named in `[verify] checks` (all by default), writing
/// `<id>.txt` per check and a `summary.txt`. Exits nonzero if any check fails.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let prep = prepare(cfg)?;
    create_out(&cfg.out)?;
    let v = &cfg.verify;
    let registry = CheckRegistry::with_builtins();
    let ids: Vec<String> = match &v.checks {
        Some(c) => c.clone(),
        None => registry.ids().iter().map(|s| s.to_string()).collect(),
    };
    for id in &ids {
        if registry.get(id).is_none() {
            return Err(Error::invalid(format!(
                "unknown check {id:?}; known: {}",
                registry.ids().join(", ")
            )));
        }
    }
    let ctx = CheckContext {
        manifold: prep.manifold.clone(),
        objective: Some(prep.objective.clone()),
        saddle: Some(prep.x0.clone()),
        thresholds: Some(prep.derivation.thresholds.clone()),
        n_samples: v.n_samples.unwrap_or(1000),
        scales: v.scales.clone().unwrap_or_else(|| DEFAULT_SCALES.to_vec()),
        radii: v.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec()),
        eta: v.eta.unwrap_or(0.9 / prep.params.beta),
        mu: v.mu.unwrap_or(1.0),
        t_max: v.t_max.unwrap_or(1000),
        seed: cfg.seed,
        control: if v.falsify {
            Control::Falsified
        } else {
            Control::Nominal
        },
    };
    let mut s = String::new();
    kv(&mut s, "experiment", "verify");
    kv(&mut s, "manifold", prep.manifold.id());
    kv(&mut s, "seed", cfg.seed);
    kv(&mut s, "control", if v.falsify { "falsified" } else { "nominal" });
    let mut files = Vec::new();
    let mut all = true;
    for id in &ids {
        let out = registry.run(id, &ctx)?;
        let path = cfg.out.join(format!("{id}.txt"));
        write_file(&path, &out.to_text())?;
        files.push(path);
        all &= out.pass();
        kv(&mut s, id, if out.pass() { "pass" } else { "fail" });
    }
    let summary_path = cfg.out.join("summary.txt");
    write_file(&summary_path, &s)?;
    files.push(summary_path);
    Ok(Outcome {
        exit_code: if all { EXIT_OK } else { EXIT_NOT_CONVERGED },
        summary: s,
        files,
    })
}

/// Every derived threshold, the warnings raised while deriving them, and both
/// sides of the accuracy condition with curvature constants fitted on the
/// manifold when it supports the log map.
pub fn thresholds_report(cfg: &ExperimentConfig) -> Result<String> {
    let prep = prepare(cfg)?;
    let mut s = String::new();
    kv(&mut s, "experiment", cfg.experiment);
    kv(&mut s, "manifold", prep.manifold.id());
    kv(&mut s, "mode", cfg.mode);
    kv(&mut s, "c_hat", fmt_float(cfg.c_hat));
    write_params(&mut s, &prep);
    let fit = check_log_bilipschitz(
        &*prep.manifold,
        200,
        &DEFAULT_RADII,
        &mut substream(cfg.seed, AUDIT_STREAM),
        Control::Nominal,
    );
    match fit {
        Ok(rep) => {
            let c = |k| rep.note(k).and_then(|v| v.parse::<f64>().ok()).unwrap_or(f64::NAN);
            let (c2, c3) = (c("c2"), c("c3"));
            let b = epsilon_bound(&prep.params, &prep.derivation.thresholds, c2, c3);
            kv(&mut s, "fitted_c2", fmt_float(c2));
            kv(&mut s, "fitted_c3", fmt_float(c3));
            kv(&mut s, "epsilon_bound.curvature_term", fmt_float(b.curvature_term));
            kv(&mut s, "epsilon_bound.injectivity_term", fmt_float(b.injectivity_term));
            kv(&mut s, "epsilon_bound.satisfied", b.satisfied);
            if !b.satisfied {
                kv(
                    &mut s,
                    "warning",
                    format!(
                        "epsilon {} exceeds min({}, {})",
                        fmt_float(b.epsilon),
                        fmt_float(b.curvature_term),
                        fmt_float(b.injectivity_term)
                    ),
                );
            }
        }
        Err(e) => kv(&mut s, "epsilon_bound", format!("unavailable ({e})")),
    }
    Ok(s)
}
