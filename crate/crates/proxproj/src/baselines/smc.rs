//! SPG and VASALM for stable matrix completion, both from `X = P_Omega(M)`.

use crate::apps::smc::SmcProblem;
use crate::drs::{IterateLog, Recorder};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::prox::svt;

use super::{positive, BaselineConfig, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmcParams {
    Spg { mu: f64 },
    Vasalm { alpha: f64, eta: f64 },
}

impl SmcParams {
    /// Defaults, with `n` the larger side of the matrix: SPG `mu = 10 n / 1000`;
    /// VASALM `eta = 3`, `alpha = 1e-2 * 1000 / n`. The singular values of the
    /// generated matrices grow like `n`, so both thresholds keep the same
    /// relation to the spectrum as `mu = 10`, `alpha = 1e-2` at `n = 1000`.
    pub fn resolve(cfg: &BaselineConfig, p: &SmcProblem) -> Result<Self> {
        cfg.expect(&[Method::Spg, Method::Vasalm], "SMC")?;
        let (r, c) = p.omega().shape();
        let scale = r.max(c) as f64 / 1000.0;
        Ok(match cfg.method {
            Method::Spg => {
                if p.eps() <= 0.0 {
                    return Err(Error::Config("SPG needs eps > 0".into()));
                }
                SmcParams::Spg {
                    mu: positive("mu", cfg.mu.unwrap_or(10.0 * scale))?,
                }
            }
            _ => {
                let alpha = positive("alpha", cfg.alpha.unwrap_or(1e-2 / scale))?;
                let eta = cfg.eta.unwrap_or(3.0);
                if !(eta > 2.0 && eta.is_finite()) {
                    return Err(Error::Config(format!("VASALM needs eta > 2, got {eta}")));
                }
                SmcParams::Vasalm { alpha, eta }
            }
        })
    }
}

pub fn run_smc_baseline(p: &SmcProblem, cfg: &BaselineConfig) -> Result<(IterateLog, DenseMatrix)> {
    let params = SmcParams::resolve(cfg, p)?;
    let m = p.m_obs();
    let omega = p.omega();
    let eps = p.eps();
    let mut x = m.clone();
    let mut dual = DenseMatrix::zeros(m.nrows(), m.ncols());
    let mut rec = Recorder::new(cfg.log_every, cfg.residual_tol);
    for k in 1..=cfg.max_iters {
        match params {
            SmcParams::Spg { mu } => {
                let y = svt(&x, mu)?;
                let gap = omega.dist_on(m, &y)?;
                // theta* = (gap - eps) / (mu eps); on the mask this blends toward M
                // with weight mu theta / (1 + mu theta) = (gap - eps) / gap.
                let w = if gap > eps { (gap - eps) / gap } else { 0.0 };
                x = y;
                for &(i, j) in omega.indices() {
                    x[(i, j)] = w * m[(i, j)] + (1.0 - w) * x[(i, j)];
                }
            }
            SmcParams::Vasalm { alpha, eta } => {
                // N = P_K(dual / alpha + P_Omega(M) - X), where P_K projects the
                // observed entries onto the eps-ball and leaves the rest unchanged.
                let mut n = &dual / alpha + m - &x;
                let on = omega.norm_on(&n)?;
                if on > eps {
                    let shrink = eps / on;
                    for &(i, j) in omega.indices() {
                        n[(i, j)] *= shrink;
                    }
                }
                let hat = &dual - (&x + &n - m) * alpha;
                let x_new = svt(&(&x + &hat / (eta * alpha)), 1.0 / (eta * alpha))?;
                dual = hat + (&x - &x_new) * alpha;
                x = x_new;
            }
        }
        if rec.push(k, &x, p, k == cfg.max_iters) {
            break;
        }
    }
    Ok((rec.finish(), x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::ObservationMask;

    #[test]
    fn zero_data_is_fixed() {
        let p = SmcProblem::new(DenseMatrix::zeros(4, 4), ObservationMask::full(4, 4), 0.1, Some(1.0)).unwrap();
        for m in [Method::Spg, Method::Vasalm] {
            let cfg = BaselineConfig {
                max_iters: 10,
                residual_tol: 0.0,
                ..BaselineConfig::new(m)
            };
            let (_, x) = run_smc_baseline(&p, &cfg).unwrap();
            assert_eq!(x, DenseMatrix::zeros(4, 4), "{m}");
        }
    }

    #[test]
    fn spg_is_feasible() {
        let m = DenseMatrix::from_fn(6, 6, |i, j| ((i + 1) * (j + 2)) as f64);
        let omega = ObservationMask::new(6, 6, (0..6).flat_map(|i| [(i, i), (i, (i + 2) % 6)]).collect()).unwrap();
        let p = SmcProblem::new(m, omega, 0.5, None).unwrap();
        let cfg = BaselineConfig {
            mu: Some(1.0),
            max_iters: 100,
            residual_tol: 0.0,
            ..BaselineConfig::new(Method::Spg)
        };
        let (log, _) = run_smc_baseline(&p, &cfg).unwrap();
        assert!(log.max_violation <= 1e-12);
    }

    #[test]
    fn config_rules() {
        let p = SmcProblem::new(DenseMatrix::zeros(2, 2), ObservationMask::full(2, 2), 0.0, Some(1.0)).unwrap();
        assert!(SmcParams::resolve(&BaselineConfig::new(Method::Spg), &p).is_err());
        let bad = BaselineConfig {
            eta: Some(1.5),
            ..BaselineConfig::new(Method::Vasalm)
        };
        assert!(SmcParams::resolve(&bad, &p).is_err());
    }

    #[test]
    fn defaults_match_reference_size() {
        let p = SmcProblem::new(DenseMatrix::zeros(1000, 1000), ObservationMask::full(1000, 1000), 1.0, Some(1.0)).unwrap();
        assert_eq!(SmcParams::resolve(&BaselineConfig::new(Method::Spg), &p).unwrap(), SmcParams::Spg { mu: 10.0 });
        assert_eq!(
            SmcParams::resolve(&BaselineConfig::new(Method::Vasalm), &p).unwrap(),
            SmcParams::Vasalm { alpha: 1e-2, eta: 3.0 }
        );
        let p = SmcProblem::new(DenseMatrix::zeros(200, 100), ObservationMask::full(200, 100), 1.0, Some(1.0)).unwrap();
        match SmcParams::resolve(&BaselineConfig::new(Method::Spg), &p).unwrap() {
            SmcParams::Spg { mu } => assert!((mu - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
