//! LB, LMM and PDHG for basis pursuit, all from `x = v = 0`.

use crate::apps::bp::BpProblem;
use crate::drs::{IterateLog, Recorder};
use crate::error::Result;
use crate::linalg::DenseVector;
use crate::prox::shrink;

use super::{positive, strict_bound, BaselineConfig, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BpParams {
    /// `v' = v - A^T (A x - b)`, `x' = shrink(alpha v', alpha mu)`.
    Lb { mu: f64, alpha: f64 },
    /// `x' = shrink(x - alpha A^T (v + lambda (A x - b)), alpha)`, `v' = v + lambda (A x' - b)`.
    Lmm { lambda: f64, alpha: f64 },
    /// `x' = shrink(x - alpha A^T v, alpha)`, `v' = v + lambda (A (2x' - x) - b)`.
    Pdhg { lambda: f64, alpha: f64 },
}

impl BpParams {
    /// Defaults: LB `mu = 2G`, `alpha = 2/G`; LMM and PDHG `lambda = 100G`,
    /// `alpha = 1/(lambda G)`, with `G = ||A A^T||`.
    pub fn resolve(cfg: &BaselineConfig, p: &BpProblem) -> Result<Self> {
        cfg.expect(&[Method::Lb, Method::Lmm, Method::Pdhg], "basis pursuit")?;
        let g = p.gram_norm();
        Ok(match cfg.method {
            Method::Lb => {
                let mu = positive("mu", cfg.mu.unwrap_or(2.0 * g))?;
                let alpha = positive("alpha", cfg.alpha.unwrap_or(2.0 / g))?;
                strict_bound("LB alpha ||AA^T||", alpha * g, 2.0)?;
                BpParams::Lb { mu, alpha }
            }
            m => {
                let lambda = positive("lambda", cfg.lambda.unwrap_or(100.0 * g))?;
                let alpha = positive("alpha", cfg.alpha.unwrap_or(1.0 / (lambda * g)))?;
                strict_bound("alpha lambda ||A^T A||", alpha * lambda * g, 1.0)?;
                if m == Method::Lmm {
                    BpParams::Lmm { lambda, alpha }
                } else {
                    BpParams::Pdhg { lambda, alpha }
                }
            }
        })
    }
}

pub fn run_bp_baseline(p: &BpProblem, cfg: &BaselineConfig) -> Result<(IterateLog, DenseVector)> {
    let params = BpParams::resolve(cfg, p)?;
    let (a, b) = (p.a(), p.b());
    let mut x = DenseVector::zeros(p.dim());
    let dual_dim = if matches!(params, BpParams::Lb { .. }) { p.dim() } else { b.len() };
    let mut v = DenseVector::zeros(dual_dim);
    let mut rec = Recorder::new(cfg.log_every, cfg.residual_tol);
    for k in 1..=cfg.max_iters {
        match params {
            BpParams::Lb { mu, alpha } => {
                v -= a.tr_mul(&(a * &x - b));
                x = shrink(&(&v * alpha), alpha * mu);
            }
            BpParams::Lmm { lambda, alpha } => {
                let g = a.tr_mul(&(&v + (a * &x - b) * lambda));
                x = shrink(&(&x - g * alpha), alpha);
                v += (a * &x - b) * lambda;
            }
            BpParams::Pdhg { lambda, alpha } => {
                let xn = shrink(&(&x - a.tr_mul(&v) * alpha), alpha);
                v += (a * (&xn * 2.0 - &x) - b) * lambda;
                x = xn;
            }
        }
        if rec.push(k, &x, p, k == cfg.max_iters) {
            break;
        }
    }
    Ok((rec.finish(), x))
}
