//! Comparison methods, run on the same metric definitions as PP.
//!
//! Every method takes a [`BaselineConfig`]; parameters left as `None` take the
//! method's default, which may depend on the instance (e.g. `||A^T A||`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub mod bp;
pub mod emd;
pub mod smc;
pub mod spcp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Linearized Bregman.
    Lb,
    /// Linearized method of multipliers.
    Lmm,
    /// Primal dual hybrid gradient.
    Pdhg,
    Vasalm,
    /// Partially smoothed proximal gradient.
    Pspg,
    /// Proximal gradient on the quadratic penalty.
    Pg,
    /// PDHG on the Hodge-decomposed flux.
    GProx,
    /// Smoothed proximal gradient.
    Spg,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Lb,
        Method::Lmm,
        Method::Pdhg,
        Method::Vasalm,
        Method::Pspg,
        Method::Pg,
        Method::GProx,
        Method::Spg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lb => "lb",
            Method::Lmm => "lmm",
            Method::Pdhg => "pdhg",
            Method::Vasalm => "vasalm",
            Method::Pspg => "pspg",
            Method::Pg => "pg",
            Method::GProx => "gprox",
            Method::Spg => "spg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower || (lower == "g-prox" && *m == Method::GProx))
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub method: Method,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub max_iters: usize,
    /// `0` disables the early stop.
    pub residual_tol: f64,
    pub log_every: usize,
    /// Tolerance of the scalar root searches (PSPG `theta*`, projections).
    pub root_tol: f64,
}

impl BaselineConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            alpha: None,
            lambda: None,
            mu: None,
            eta: None,
            sigma: None,
            tau: None,
            max_iters: 1000,
            residual_tol: 1e-5,
            log_every: 1,
            root_tol: 1e-12,
        }
    }

    pub(crate) fn expect(&self, allowed: &[Method], app: &str) -> Result<()> {
        if !allowed.contains(&self.method) {
            return Err(Error::Config(format!("method {} does not apply to {app}", self.method)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if !(self.residual_tol >= 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::Config(format!("residual_tol must be nonnegative, got {}", self.residual_tol)));
        }
        if !(self.root_tol > 0.0) {
            return Err(Error::Config(format!("root_tol must be positive, got {}", self.root_tol)));
        }
        Ok(())
    }
}

pub(crate) fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

/// Checks a strict step condition `value < bound`. Values at the bound up to
/// rounding are accepted with a warning since several published defaults
/// sit exactly there.
pub(crate) fn strict_bound(what: &str, value: f64, bound: f64) -> Result<()> {
    let slack = 1e-9 * bound;
    if value < bound - slack {
        Ok(())
    } else if value <= bound + slack {
        log::warn!("{what} = {value} is at its convergence bound {bound}");
        Ok(())
    } else {
        Err(Error::Config(format!("{what} = {value} violates the step condition (< {bound})")))
    }
}
