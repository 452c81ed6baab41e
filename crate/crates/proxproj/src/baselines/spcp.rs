//! VASALM, PSPG and PG for stable principal component pursuit, all from
//! `(L, S) = (M, 0)`.

use crate::apps::spcp::{stack, SpcpProblem};
use crate::drs::{IterateLog, Recorder};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::prox::{ball_project, shrink, svt};

use super::{positive, BaselineConfig, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpcpParams {
    Vasalm { alpha: f64, eta: f64 },
    /// Smoothing `mu` of the nuclear norm.
    Pspg { mu: f64 },
    /// Penalty weight `mu` and step `alpha <= mu`.
    Pg { mu: f64, alpha: f64 },
}

impl SpcpParams {
    /// Defaults: VASALM `eta = 3`, `alpha = 1e-5`; PSPG `mu = delta / min(n1, n2)`
    /// with `delta = 0.1 (||M||_* )`, the objective of the feasible start;
    /// PG `mu = 1`, `alpha = mu`.
    pub fn resolve(cfg: &BaselineConfig, p: &SpcpProblem) -> Result<Self> {
        cfg.expect(&[Method::Vasalm, Method::Pspg, Method::Pg], "SPCP")?;
        Ok(match cfg.method {
            Method::Vasalm => {
                let alpha = positive("alpha", cfg.alpha.unwrap_or(1e-5))?;
                let eta = cfg.eta.unwrap_or(3.0);
                if !(eta > 2.0 && eta.is_finite()) {
                    return Err(Error::Config(format!("VASALM needs eta > 2, got {eta}")));
                }
                SpcpParams::Vasalm { alpha, eta }
            }
            Method::Pspg => {
                if p.eps() <= 0.0 {
                    return Err(Error::Config("PSPG needs eps > 0".into()));
                }
                let mu = match cfg.mu {
                    Some(mu) => mu,
                    None => {
                        let (n1, n2) = p.m().shape();
                        let start = p.objective_of(p.m(), &DenseMatrix::zeros(n1, n2));
                        0.1 * start / n1.min(n2) as f64
                    }
                };
                SpcpParams::Pspg { mu: positive("mu", mu)? }
            }
            _ => {
                let mu = positive("mu", cfg.mu.unwrap_or(1.0))?;
                let alpha = positive("alpha", cfg.alpha.unwrap_or(mu))?;
                if alpha > mu * (1.0 + 1e-12) {
                    return Err(Error::Config(format!("PG step {alpha} exceeds the penalty weight {mu}")));
                }
                SpcpParams::Pg { mu, alpha }
            }
        })
    }
}

/// Returns the log and the final `(L, S)`.
pub fn run_spcp_baseline(p: &SpcpProblem, cfg: &BaselineConfig) -> Result<(IterateLog, (DenseMatrix, DenseMatrix))> {
    let params = SpcpParams::resolve(cfg, p)?;
    let m = p.m();
    let lam = p.lambda();
    let mut l = m.clone();
    let mut s = DenseMatrix::zeros(m.nrows(), m.ncols());
    let mut dual = DenseMatrix::zeros(m.nrows(), m.ncols());
    let zero = DenseMatrix::zeros(m.nrows(), m.ncols());
    let mut rec = Recorder::new(cfg.log_every, cfg.residual_tol);
    for k in 1..=cfg.max_iters {
        match params {
            SpcpParams::Vasalm { alpha, eta } => {
                let n = ball_project(&(&dual / alpha + m - &l - &s), &zero, p.eps());
                let hat = &dual - (&l + &s + &n - m) * alpha;
                let step = &hat / (alpha * eta);
                let s_new = shrink(&(&s + &step), lam / (alpha * eta));
                let l_new = svt(&(&l + &step), 1.0 / (alpha * eta))?;
                dual = hat + (&l - &l_new) * alpha + (&s - &s_new) * alpha;
                l = l_new;
                s = s_new;
            }
            SpcpParams::Pspg { mu } => {
                let y = svt(&l, mu)?;
                let d = m - &y;
                let theta = pspg_theta(&d, lam, mu, p.eps(), cfg.root_tol)?;
                if theta == 0.0 {
                    l = y;
                    s.fill(0.0);
                } else {
                    s = shrink(&d, lam * (1.0 + mu * theta) / theta);
                    l = ((m - &s) * (mu * theta) + y) / (1.0 + mu * theta);
                }
            }
            SpcpParams::Pg { mu, alpha } => {
                let g = (&l + &s - m) * (alpha / mu);
                let l_new = svt(&(&l - &g), alpha)?;
                s = shrink(&(&s - &g), alpha * lam);
                l = l_new;
            }
        }
        if rec.push(k, &stack(&l, &s), p, k == cfg.max_iters) {
            break;
        }
    }
    Ok((rec.finish(), (l, s)))
}

/// `||min(lambda / theta, |D| / (1 + mu theta))||_F`.
fn pspg_gap(d: &DenseMatrix, lam: f64, mu: f64, theta: f64) -> f64 {
    d.iter()
        .map(|v| {
            let t = (lam / theta).min(v.abs() / (1.0 + mu * theta));
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

/// The `theta > 0` with `pspg_gap = eps`, or `0` when `||D||_F <= eps`
/// (the constraint is inactive). The published upper bound seeds the bracket,
/// which is expanded geometrically if it does not enclose the root.
pub fn pspg_theta(d: &DenseMatrix, lam: f64, mu: f64, eps: f64, tol: f64) -> Result<f64> {
    let dn = d.norm();
    if dn <= eps {
        return Ok(0.0);
    }
    let n = d.len() as f64;
    let hint = (n * lam * eps).min(((dn - eps) / (mu * eps)).abs());
    let mut hi = if hint > 0.0 && hint.is_finite() { hint } else { 1.0 };
    let mut expansions = 0;
    while pspg_gap(d, lam, mu, hi) > eps {
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::TauConvergence {
                best_tau: hi,
                defect: pspg_gap(d, lam, mu, hi) - eps,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pspg_gap(d, lam, mu, mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * hi {
            break;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::spcp::spcp_pg_sequence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_m(seed: u64, r: usize, c: usize) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_data_stays_at_zero() {
        let p = SpcpProblem::new(DenseMatrix::zeros(4, 3), None, 0.1).unwrap();
        for m in [Method::Vasalm, Method::Pspg, Method::Pg] {
            let cfg = BaselineConfig {
                mu: if m == Method::Pspg { Some(0.1) } else { None },
                max_iters: 10,
                residual_tol: 0.0,
                ..BaselineConfig::new(m)
            };
            let (_, (l, s)) = run_spcp_baseline(&p, &cfg).unwrap();
            assert_eq!(l, DenseMatrix::zeros(4, 3), "{m}");
            assert_eq!(s, DenseMatrix::zeros(4, 3), "{m}");
        }
    }

    #[test]
    fn pg_matches_closed_form_recursion() {
        let p = SpcpProblem::new(rand_m(2, 7, 5), None, 0.0).unwrap();
        let cfg = BaselineConfig {
            mu: Some(0.4),
            max_iters: 30,
            residual_tol: 0.0,
            ..BaselineConfig::new(Method::Pg)
        };
        let (_, (l, s)) = run_spcp_baseline(&p, &cfg).unwrap();
        let seq = spcp_pg_sequence(&p, 0.4, 31).unwrap();
        assert!((stack(&l, &s) - &seq[30]).norm() < 1e-12);
    }

    #[test]
    fn pspg_iterates_are_feasible() {
        let p = SpcpProblem::new(rand_m(4, 8, 6), None, 0.3).unwrap();
        let cfg = BaselineConfig {
            max_iters: 50,
            residual_tol: 0.0,
            ..BaselineConfig::new(Method::Pspg)
        };
        let (log, _) = run_spcp_baseline(&p, &cfg).unwrap();
        assert!(log.max_violation <= 1e-9, "{:e}", log.max_violation);
    }

    #[test]
    fn pspg_theta_solves_its_equation() {
        let d = rand_m(9, 5, 5) * 3.0;
        let theta = pspg_theta(&d, 0.4, 0.2, 0.5, 1e-14).unwrap();
        assert!((pspg_gap(&d, 0.4, 0.2, theta) - 0.5).abs() < 1e-10);
        assert_eq!(pspg_theta(&(d * 0.01), 0.4, 0.2, 10.0, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn config_rules() {
        let p = SpcpProblem::new(rand_m(1, 3, 3), None, 0.0).unwrap();
        let cfg = |m, eta, alpha| BaselineConfig {
            eta,
            alpha,
            ..BaselineConfig::new(m)
        };
        assert!(SpcpParams::resolve(&cfg(Method::Vasalm, Some(2.0), None), &p).is_err());
        assert!(SpcpParams::resolve(&cfg(Method::Pspg, None, None), &p).is_err());
        assert!(SpcpParams::resolve(&cfg(Method::Pg, None, Some(2.0)), &p).is_err());
        assert_eq!(
            SpcpParams::resolve(&cfg(Method::Vasalm, None, None), &p).unwrap(),
            SpcpParams::Vasalm { alpha: 1e-5, eta: 3.0 }
        );
    }
}
