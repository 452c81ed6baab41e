//! Executing one method on one instance, and the artifacts a run leaves behind.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use proxproj::baselines::{BaselineConfig, Method};
use proxproj::drs::{IterateLog, SolverConfig};
use proxproj::instance::{ProblemInstance, Solution};
use proxproj::{Error, Result};
use sha2::{Digest, Sha256};

use crate::io::{encode_matrix, encode_vector};
use proxproj::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    Pp,
    Baseline(Method),
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodTag::Pp => f.write_str("pp"),
            MethodTag::Baseline(m) => m.fmt(f),
        }
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("pp") {
            Ok(MethodTag::Pp)
        } else {
            s.parse().map(MethodTag::Baseline)
        }
    }
}

/// Step size PP uses when `--alpha` is not given. For SMC it is `0.05 n`
/// for an `n x n` matrix, in proportion to the spectrum of the generated data.
pub fn default_alpha(p: &ProblemInstance) -> f64 {
    match p {
        ProblemInstance::Bp(_) => 0.1,
        ProblemInstance::Spcp(_) => 1.0,
        ProblemInstance::Emd(_) => 1e-4,
        ProblemInstance::Smc(s) => {
            let (r, c) = s.omega().shape();
            0.05 * r.max(c) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub method: MethodTag,
    pub alpha: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub log_every: usize,
    pub tau_tol: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
}

impl RunSettings {
    pub fn new(method: MethodTag) -> Self {
        Self {
            method,
            alpha: None,
            max_iters: 1000,
            tol: 1e-5,
            log_every: 1,
            tau_tol: None,
            lambda: None,
            mu: None,
            eta: None,
            sigma: None,
            tau: None,
        }
    }

    pub fn record(&self, m: &mut Manifest) {
        m.set("method", self.method);
        m.set("max_iters", self.max_iters);
        m.set("tol", self.tol);
        m.set("log_every", self.log_every);
        for (k, v) in [
            ("alpha", self.alpha),
            ("tau_tol", self.tau_tol),
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("eta", self.eta),
            ("sigma", self.sigma),
            ("tau", self.tau),
        ] {
            if let Some(v) = v {
                m.set(k, v);
            }
        }
    }
}

pub struct RunOutcome {
    pub method: MethodTag,
    pub log: IterateLog,
    pub solution: Solution,
}

pub fn execute(p: &ProblemInstance, s: &RunSettings) -> Result<RunOutcome> {
    let (log, solution) = match s.method {
        MethodTag::Pp => {
            let mut cfg = SolverConfig {
                alpha: s.alpha.unwrap_or_else(|| default_alpha(p)),
                max_iters: s.max_iters,
                residual_tol: s.tol,
                log_every: s.log_every,
                ..SolverConfig::default()
            };
            if let Some(t) = s.tau_tol {
                cfg.tau_tol = t;
            }
            p.run_pp(&cfg)?
        }
        MethodTag::Baseline(method) => {
            let mut cfg = BaselineConfig {
                alpha: s.alpha,
                lambda: s.lambda,
                mu: s.mu,
                eta: s.eta,
                sigma: s.sigma,
                tau: s.tau,
                max_iters: s.max_iters,
                residual_tol: s.tol,
                log_every: s.log_every,
                ..BaselineConfig::new(method)
            };
            if let Some(t) = s.tau_tol {
                cfg.root_tol = t;
            }
            p.run_baseline(&cfg)?
        }
    };
    Ok(RunOutcome {
        method: s.method,
        log,
        solution,
    })
}

pub const CSV_HEADER: [&str; 5] = ["iter", "violation", "objective", "residual", "wall_ms"];

pub fn metrics_csv(log: &IterateLog) -> Result<Vec<u8>> {
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for r in &log.records {
        w.write_record([
            r.k.to_string(),
            r.violation.to_string(),
            r.objective.to_string(),
            r.residual.to_string(),
            r.wall_ms.to_string(),
        ])
        .map_err(to_io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// `method iters viol objective residual`.
pub fn summary_line(method: MethodTag, log: &IterateLog) -> String {
    let (viol, obj, res) = log
        .last()
        .map_or((f64::NAN, f64::NAN, f64::NAN), |r| (r.violation, r.objective, r.residual));
    format!("{method} {} {viol:.6e} {obj:.6e} {res:.6e}", log.iterations)
}

/// Canonical bytes of an instance's data, in PPMAT1/PPVEC1 encoding.
pub fn problem_bytes(p: &ProblemInstance) -> Vec<u8> {
    let mut out = p.name().as_bytes().to_vec();
    out.extend_from_slice(&p.eps().to_le_bytes());
    match p {
        ProblemInstance::Bp(b) => {
            out.extend(encode_matrix(b.a()));
            out.extend(encode_vector(b.b()));
        }
        ProblemInstance::Spcp(s) => {
            out.extend_from_slice(&s.lambda().to_le_bytes());
            out.extend(encode_matrix(s.m()));
        }
        ProblemInstance::Emd(e) => {
            out.extend_from_slice(&e.op().h().to_le_bytes());
            out.extend(encode_matrix(e.rho0()));
            out.extend(encode_matrix(e.rho1()));
        }
        ProblemInstance::Smc(s) => {
            let (r, c) = s.omega().shape();
            let mask = DenseMatrix::from_fn(r, c, |i, j| if s.omega().contains(i, j) { 1.0 } else { 0.0 });
            out.extend(encode_matrix(s.m_obs()));
            out.extend(encode_matrix(&mask));
            out.extend_from_slice(&s.residual_scale().to_le_bytes());
        }
    }
    out
}

/// SHA-256 over a git-style `blob <len>\0` header followed by the content.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()));
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Sorted `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Parses flat `key = value` text; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<out>.csv` and `<out>.manifest`, recording both paths in the manifest.
pub fn write_artifacts(out: &Path, log: &IterateLog, manifest: &mut Manifest) -> Result<()> {
    let csv_path = with_suffix(out, ".csv");
    let man_path = with_suffix(out, ".manifest");
    manifest.set("output_csv", csv_path.display());
    manifest.set("output_manifest", man_path.display());
    fs::write(&csv_path, metrics_csv(log)?)?;
    fs::write(&man_path, manifest.render())?;
    Ok(())
}
