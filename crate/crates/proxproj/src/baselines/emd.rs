//! PDHG and G-Prox PDHG for the earth mover's distance.

use crate::apps::emd::{emd_project, EmdProblem};
use crate::drs::{IterateLog, Recorder};
use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::prox::shrink;

use super::{positive, strict_bound, BaselineConfig, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmdParams {
    /// `m' = shrink(m - alpha A^T v, alpha)`, `v' = v + lambda (A(2m' - m) - b)`.
    Pdhg { lambda: f64, alpha: f64 },
    /// Dual step `sigma`, primal step `tau`.
    GProx { sigma: f64, tau: f64 },
}

impl EmdParams {
    /// Defaults: PDHG `lambda = 5`, `alpha = 1/(5 ||A^T A||)`; G-Prox `tau = 1e-4`, `sigma = 1e4`.
    pub fn resolve(cfg: &BaselineConfig, p: &EmdProblem) -> Result<Self> {
        cfg.expect(&[Method::Pdhg, Method::GProx], "EMD")?;
        let g = p.op().gram_norm();
        Ok(match cfg.method {
            Method::Pdhg => {
                let lambda = positive("lambda", cfg.lambda.unwrap_or(5.0))?;
                let alpha = positive("alpha", cfg.alpha.unwrap_or(1.0 / (5.0 * g)))?;
                strict_bound("alpha lambda ||A^T A||", alpha * lambda * g, 1.0)?;
                EmdParams::Pdhg { lambda, alpha }
            }
            _ => {
                let sigma = positive("sigma", cfg.sigma.unwrap_or(1e4))?;
                let tau = positive("tau", cfg.tau.unwrap_or(1e-4))?;
                strict_bound("sigma tau", sigma * tau, 1.0)?;
                EmdParams::GProx { sigma, tau }
            }
        })
    }
}

/// Returns the log and the final flux.
pub fn run_emd_baseline(p: &EmdProblem, cfg: &BaselineConfig) -> Result<(IterateLog, DenseMatrix)> {
    let params = EmdParams::resolve(cfg, p)?;
    let op = p.op();
    let mut rec = Recorder::new(cfg.log_every, cfg.residual_tol);
    let n = op.n();
    match params {
        EmdParams::Pdhg { lambda, alpha } => {
            let mut m = p.zero_flux();
            let mut v = DenseMatrix::zeros(n, n);
            for k in 1..=cfg.max_iters {
                let mn = shrink(&(&m - op.adjoint(&v)? * alpha), alpha);
                v += (op.divergence(&(&mn * 2.0 - &m))? - p.rhs()) * lambda;
                m = mn;
                if rec.push(k, &m, p, k == cfg.max_iters) {
                    break;
                }
            }
            Ok((rec.finish(), m))
        }
        EmdParams::GProx { sigma, tau } => {
            // m = u + grad(psi) with grad(psi) = P_C(0) and div(u) kept near zero.
            let grad_psi = emd_project(&p.zero_flux(), p, cfg.root_tol)?;
            let zero_rhs = DenseMatrix::zeros(n, n);
            let mut u = p.zero_flux();
            let mut dual = p.zero_flux();
            let mut m = grad_psi.clone();
            for k in 1..=cfg.max_iters {
                let w = &dual + (&u + &grad_psi) * sigma;
                let dn = w.map(|t| t / t.abs().max(1.0));
                let reflected = &dn * 2.0 - &dual;
                let div_free = op.project(&reflected, &zero_rhs, p.eps(), cfg.root_tol)?;
                u -= div_free * tau;
                dual = dn;
                m = &u + &grad_psi;
                if rec.push(k, &m, p, k == cfg.max_iters) {
                    break;
                }
            }
            Ok((rec.finish(), m))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drs::Metrics;

    fn point_mass(n: usize, i: usize, j: usize) -> DenseMatrix {
        let mut r = DenseMatrix::zeros(n, n);
        r[(i, j)] = 1.0;
        r
    }

    #[test]
    fn equal_densities_give_zero_flux() {
        let r = DenseMatrix::from_fn(4, 4, |i, j| 1.0 + (i * j) as f64);
        let p = EmdProblem::new(r.clone(), r, None, 1e-10).unwrap();
        for m in [Method::Pdhg, Method::GProx] {
            let cfg = BaselineConfig {
                max_iters: 50,
                residual_tol: 0.0,
                ..BaselineConfig::new(m)
            };
            let (_, flux) = run_emd_baseline(&p, &cfg).unwrap();
            assert!(p.objective(&flux) < 1e-12, "{m}");
        }
    }

    #[test]
    fn pdhg_point_masses() {
        let p = EmdProblem::new(point_mass(5, 0, 0), point_mass(5, 2, 3), None, 1e-10).unwrap();
        let cfg = BaselineConfig {
            max_iters: 20_000,
            residual_tol: 0.0,
            log_every: 1000,
            ..BaselineConfig::new(Method::Pdhg)
        };
        let (_, flux) = run_emd_baseline(&p, &cfg).unwrap();
        assert!((p.objective(&flux) - 5.0).abs() < 0.1, "{}", p.objective(&flux));
    }

    #[test]
    fn step_conditions() {
        let p = EmdProblem::new(point_mass(3, 0, 0), point_mass(3, 2, 2), None, 1e-10).unwrap();
        let cfg = BaselineConfig {
            sigma: Some(1e5),
            ..BaselineConfig::new(Method::GProx)
        };
        assert!(EmdParams::resolve(&cfg, &p).is_err());
        assert!(EmdParams::resolve(&BaselineConfig::new(Method::GProx), &p).is_ok());
        assert!(EmdParams::resolve(&BaselineConfig::new(Method::Lb), &p).is_err());
    }
}
