use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Outcome of one sampled lemma check.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub lemma_id: String,
    pub n_samples: usize,
    /// Strictly decreasing.
    pub scales: Vec<f64>,
    /// The quantity whose decay is regressed, maximised over samples at each scale.
    pub max_residual_per_scale: Vec<f64>,
    /// Least-squares slope of `ln max_residual` against `ln scale`; `None` when
    /// fewer than two scales have a nonzero residual.
    pub fitted_slope: Option<f64>,
    pub slope_window: Option<(f64, f64)>,
    /// Smallest constant that makes the bound hold at the largest scale.
    pub fitted_constant: f64,
    /// Samples that broke the audited inequality.
    pub violations: usize,
    pub pass: bool,
    pub notes: Vec<(String, String)>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("line {line}: expected a number, got {s:?}")))
}

impl VerificationReport {
    pub fn note(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lemma_id = {}", self.lemma_id);
        let _ = writeln!(s, "n_samples = {}", self.n_samples);
        let slope = self.fitted_slope.map_or("none".to_string(), fmt_f64);
        let _ = writeln!(s, "fitted_slope = {slope}");
        let window = self
            .slope_window
            .map_or("none".to_string(), |(a, b)| format!("{} {}", fmt_f64(a), fmt_f64(b)));
        let _ = writeln!(s, "slope_window = {window}");
        let _ = writeln!(s, "fitted_constant = {}", fmt_f64(self.fitted_constant));
        let _ = writeln!(s, "violations = {}", self.violations);
        let _ = writeln!(s, "pass = {}", self.pass);
        let _ = writeln!(s, "\n[scales]");
        for (sc, r) in self.scales.iter().zip(&self.max_residual_per_scale) {
            let _ = writeln!(s, "{} {}", fmt_f64(*sc), fmt_f64(*r));
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "\n[notes]");
            for (k, v) in &self.notes {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = VerificationReport {
            lemma_id: String::new(),
            n_samples: 0,
            scales: vec![],
            max_residual_per_scale: vec![],
            fitted_slope: None,
            slope_window: None,
            fitted_constant: 0.0,
            violations: 0,
            pass: false,
            notes: vec![],
        };
        let mut section = "";
        let mut seen_id = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = match &line[1..line.len() - 1] {
                    "scales" => "scales",
                    "notes" => "notes",
                    other => return Err(Error::invalid(format!("line {line_no}: unknown section [{other}]"))),
                };
                continue;
            }
            if section == "scales" {
                let mut it = line.split_whitespace();
                let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                    return Err(Error::invalid(format!("line {line_no}: expected `scale residual`")));
                };
                r.scales.push(parse_f64(a, line_no)?);
                r.max_residual_per_scale.push(parse_f64(b, line_no)?);
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::invalid(format!("line {line_no}: expected `key = value`")))?;
            if section == "notes" {
                r.notes.push((k.to_string(), v.to_string()));
                continue;
            }
            let bad = |what: &str| Error::invalid(format!("line {line_no}: bad {what} {v:?}"));
            match k {
                "lemma_id" => {
                    r.lemma_id = v.to_string();
                    seen_id = true;
                }
                "n_samples" => r.n_samples = v.parse().map_err(|_| bad("n_samples"))?,
                "fitted_slope" => {
                    r.fitted_slope = if v == "none" {
                        None
                    } else {
                        Some(parse_f64(v, line_no)?)
                    }
                }
                "slope_window" => {
                    r.slope_window = if v == "none" {
                        None
                    } else {
                        let (a, b) = v.split_once(' ').ok_or_else(|| bad("slope_window"))?;
                        Some((parse_f64(a, line_no)?, parse_f64(b, line_no)?))
                    }
                }
                "fitted_constant" => r.fitted_constant = parse_f64(v, line_no)?,
                "violations" => r.violations = v.parse().map_err(|_| bad("violations"))?,
                "pass" => r.pass = v.parse().map_err(|_| bad("pass"))?,
                other => return Err(Error::invalid(format!("line {line_no}: unknown key {other:?}"))),
            }
        }
        if !seen_id {
            return Err(Error::invalid("report has no lemma_id"));
        }
        Ok(r)
    }
}
