//! Structured verification reports: JSON, aligned text and ECF grid CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::ModelParams;
use crate::error::{Error, Result};

use super::ecf::EcfEstimate;

/// One grid point of a characteristic-function comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    /// Time point, for checks over several horizons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub theta: Vec<f64>,
    pub ecf_re: f64,
    pub ecf_im: f64,
    pub cf_re: f64,
    pub cf_im: f64,
    /// Standard error of the ECF itself.
    pub stderr: f64,
    /// Extra standard error propagated from estimated inputs (the center).
    pub extra_stderr: f64,
    /// Bias allowance applied at this point.
    pub bias: f64,
    pub discrepancy: f64,
    pub z: f64,
}

impl PointResult {
    pub fn new(est: &EcfEstimate, cf: Complex64, bias: f64, extra_stderr: f64) -> Self {
        Self {
            t: None,
            theta: est.theta.clone(),
            ecf_re: est.value.re,
            ecf_im: est.value.im,
            cf_re: cf.re,
            cf_im: cf.im,
            stderr: est.stderr,
            extra_stderr,
            bias,
            discrepancy: (est.value - cf).norm(),
            z: super::ecf::z_score(est, cf, bias, extra_stderr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TolerancePolicy {
    pub z_max: f64,
    /// Base finite-size bias allowance; points may carry more (see `bias`).
    pub bias_allowance: f64,
    pub description: String,
}

/// A scalar pass/fail criterion: `|value - target| ≤ bound` unless the
/// description says otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub bound: f64,
    pub pass: bool,
    pub description: String,
}

impl Criterion {
    pub fn within(name: &str, value: f64, target: f64, bound: f64, description: &str) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            bound,
            pass: (value - target).abs() <= bound,
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: ModelParams,
    pub seed: u64,
    pub sizes: BTreeMap<String, u64>,
    pub tolerance: TolerancePolicy,
    pub points: Vec<PointResult>,
    pub max_discrepancy: Option<f64>,
    pub max_z: Option<f64>,
    pub criteria: Vec<Criterion>,
    pub statistics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(check: &str, params: &ModelParams, seed: u64, tolerance: TolerancePolicy) -> Self {
        let mut warnings = Vec::new();
        if params.near_alpha_one() && !params.is_alpha_one() {
            warnings.push(format!(
                "alpha = {} is within the alpha = 1 warning band; closed forms lose accuracy here",
                params.alpha()
            ));
        }
        Self {
            check: check.into(),
            params: *params,
            seed,
            sizes: BTreeMap::new(),
            tolerance,
            points: Vec::new(),
            max_discrepancy: None,
            max_z: None,
            criteria: Vec::new(),
            statistics: BTreeMap::new(),
            notes: Vec::new(),
            warnings,
            pass: false,
        }
    }

    pub fn size(mut self, name: &str, value: u64) -> Self {
        self.sizes.insert(name.into(), value);
        self
    }

    /// Sets the summary fields and the pass flag: every point within `z_max`
    /// and every criterion met.
    pub fn finish(mut self) -> Self {
        if !self.points.is_empty() {
            self.max_discrepancy = Some(self.points.iter().map(|p| p.discrepancy).fold(0.0, f64::max));
            self.max_z = Some(self.points.iter().map(|p| p.z).fold(0.0, f64::max));
        }
        let z_max = self.tolerance.z_max;
        self.pass = self.points.iter().all(|p| p.z <= z_max) && self.criteria.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "check      {}  [{verdict}]", self.check);
        let _ = writeln!(s, "params     alpha = {}, m_xi = {}", self.params.alpha(), self.params.m_xi());
        let _ = writeln!(s, "seed       {}", self.seed);
        let sizes: Vec<String> = self.sizes.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        let _ = writeln!(s, "sizes      {}", sizes.join(", "));
        let _ = writeln!(
            s,
            "tolerance  z_max = {}, bias allowance = {} ({})",
            self.tolerance.z_max, self.tolerance.bias_allowance, self.tolerance.description
        );
        if let (Some(d), Some(z)) = (self.max_discrepancy, self.max_z) {
            let _ = writeln!(s, "max |ecf - cf| = {d:.6}, max z = {z:.3}");
        }
        if !self.points.is_empty() {
            let _ = writeln!(
                s,
                "\n{:<6} {:<24} {:>22} {:>22} {:>10} {:>10} {:>8} {:>8}",
                "t", "theta", "ecf", "cf", "|diff|", "stderr", "bias", "z"
            );
            for p in &self.points {
                let theta: Vec<String> = p.theta.iter().map(|t| format!("{t}")).collect();
                let _ = writeln!(
                    s,
                    "{:<6} {:<24} {:>22} {:>22} {:>10.6} {:>10.6} {:>8.4} {:>8.3}",
                    p.t.map_or("-".to_string(), |t| t.to_string()),
                    format!("({})", theta.join(", ")),
                    format!("{:+.5}{:+.5}i", p.ecf_re, p.ecf_im),
                    format!("{:+.5}{:+.5}i", p.cf_re, p.cf_im),
                    p.discrepancy,
                    p.stderr.hypot(p.extra_stderr),
                    p.bias,
                    p.z
                );
            }
        }
        if !self.criteria.is_empty() {
            let _ = writeln!(
                s,
                "\n{:<28} {:>14} {:>14} {:>12}  {}",
                "criterion", "value", "target", "bound", "result"
            );
            for c in &self.criteria {
                let _ = writeln!(
                    s,
                    "{:<28} {:>14.6} {:>14.6} {:>12.6}  {}",
                    c.name,
                    c.value,
                    c.target,
                    c.bound,
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
        }
        if !self.statistics.is_empty() {
            let _ = writeln!(s);
            for (k, v) in &self.statistics {
                let _ = writeln!(s, "{k:<28} {v:>14.6}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// ECF grid as CSV: `theta0.., ecf_re, ecf_im, cf_re, cf_im, z`, with a
    /// leading `t` column when points carry a time.
    pub fn write_ecf_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.points.first().map_or(0, |p| p.theta.len());
        let timed = self.points.iter().any(|p| p.t.is_some());
        let mut header: Vec<String> = timed.then(|| "t".to_string()).into_iter().collect();
        header.extend((0..dim).map(|i| format!("theta{i}")));
        header.extend(["ecf_re", "ecf_im", "cf_re", "cf_im", "z"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        for p in &self.points {
            let mut row: Vec<String> = if timed {
                vec![p.t.map_or(String::new(), |t| t.to_string())]
            } else {
                Vec::new()
            };
            row.extend(p.theta.iter().map(|t| t.to_string()));
            row.extend([p.ecf_re, p.ecf_im, p.cf_re, p.cf_im, p.z].map(|v| v.to_string()));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}
