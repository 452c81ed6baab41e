//! Stable matrix completion: `min ||X||_* s.t. ||P_Omega(X - M)||_F <= eps`.

use crate::drs::{self, IterateLog, Metrics, PpProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{nuclear_norm, DenseMatrix};
use crate::prox::{mask_project, svt, ObservationMask};

#[derive(Debug, Clone)]
pub struct SmcProblem {
    /// Observations, zero off the mask.
    m_obs: DenseMatrix,
    omega: ObservationMask,
    eps: f64,
    residual_scale: f64,
}

impl SmcProblem {
    /// Entries of `m` off the mask are ignored. `residual_scale` normalizes
    /// the update residual and defaults to `||P_Omega(M)||_F`.
    pub fn new(m: DenseMatrix, omega: ObservationMask, eps: f64, residual_scale: Option<f64>) -> Result<Self> {
        if omega.shape() != m.shape() {
            return Err(Error::Shape(format!(
                "mask is {:?} but the data matrix is {:?}",
                omega.shape(),
                m.shape()
            )));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("eps must be nonnegative, got {eps}")));
        }
        let m_obs = mask_project(&m, &omega)?;
        let scale = residual_scale.unwrap_or_else(|| m_obs.norm());
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("residual scale must be positive, got {scale}")));
        }
        Ok(Self {
            m_obs,
            omega,
            eps,
            residual_scale: scale,
        })
    }

    pub fn m_obs(&self) -> &DenseMatrix {
        &self.m_obs
    }

    pub fn omega(&self) -> &ObservationMask {
        &self.omega
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn residual_scale(&self) -> f64 {
        self.residual_scale
    }

    /// `||P_Omega(X - M)||_F`.
    pub fn constraint_norm(&self, x: &DenseMatrix) -> f64 {
        self.omega.dist_on(x, &self.m_obs).unwrap_or(f64::NAN)
    }

    /// `max(||P_Omega(X - M)|| - eps, 0) / eps` (raw norm when `eps = 0`).
    pub fn relative_violation(&self, x: &DenseMatrix) -> f64 {
        let v = self.constraint_norm(x);
        if self.eps > 0.0 {
            (v - self.eps).max(0.0) / self.eps
        } else {
            v
        }
    }
}

/// `P_Omega(((v - eps) M + eps Z) / v) + P_Omega^perp(Z)` with
/// `v = ||P_Omega(Z - M)||_F`, or `Z` itself when feasible.
pub fn smc_project(z: &DenseMatrix, p: &SmcProblem) -> Result<DenseMatrix> {
    let v = p.omega.dist_on(z, &p.m_obs)?;
    if v <= p.eps {
        return Ok(z.clone());
    }
    let mut out = z.clone();
    let (a, b) = ((v - p.eps) / v, p.eps / v);
    for &(i, j) in p.omega.indices() {
        out[(i, j)] = a * p.m_obs[(i, j)] + b * z[(i, j)];
    }
    Ok(out)
}

impl Metrics<DenseMatrix> for SmcProblem {
    fn violation(&self, x: &DenseMatrix) -> f64 {
        self.relative_violation(x)
    }

    fn objective(&self, x: &DenseMatrix) -> f64 {
        nuclear_norm(x).unwrap_or(f64::NAN)
    }

    fn residual(&self, new: &DenseMatrix, old: &DenseMatrix) -> f64 {
        drs::Iterate::dist(new, old) / self.residual_scale
    }

    fn stop_measure(&self, new: &DenseMatrix, old: &DenseMatrix) -> f64 {
        self.residual(new, old)
    }
}

impl PpProblem for SmcProblem {
    type Point = DenseMatrix;

    fn project(&self, z: &DenseMatrix, _tau_tol: f64) -> Result<DenseMatrix> {
        smc_project(z, self)
    }

    fn prox(&self, v: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
        svt(v, alpha)
    }

    fn constraint_residual(&self, x: &DenseMatrix) -> f64 {
        self.constraint_norm(x)
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn constraint_scale(&self) -> f64 {
        1.0 + self.m_obs.norm()
    }
}

/// PP-SMC from `Z = X = P_Omega(M)`, svt step before projection.
pub fn run_smc(p: &SmcProblem, cfg: &SolverConfig) -> Result<(IterateLog, DenseMatrix)> {
    let start = p.m_obs.clone();
    let (log, state) = drs::run_prox_first(p, start.clone(), start, cfg)?;
    Ok((log, state.x))
}
