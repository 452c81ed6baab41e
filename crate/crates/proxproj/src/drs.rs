//! The proximal projection iteration
//!
//! ```text
//! x^k     = P_C(z^k)
//! z^{k+1} = z^k + prox_{alpha f}(2 x^k - z^k) - x^k
//! ```
//!
//! together with stopping rules and per-iteration metric logging.

use std::time::Instant;

use nalgebra::allocator::Allocator;
use nalgebra::{DefaultAllocator, Dim, OMatrix};

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::projection::{ConstraintSpec, DEFAULT_TAU_TOL};
use crate::prox::Prox;

/// Vector-space operations the iteration needs from a point type.
pub trait Iterate: Clone + Send {
    /// `2 x - z`
    fn reflect(x: &Self, z: &Self) -> Self;
    /// `z + p - x`
    fn drs_update(z: &Self, p: &Self, x: &Self) -> Self;
    fn dist(&self, other: &Self) -> f64;
    fn norm(&self) -> f64;
}

impl<R: Dim, C: Dim> Iterate for OMatrix<f64, R, C>
where
    DefaultAllocator: Allocator<R, C>,
    OMatrix<f64, R, C>: Send,
{
    fn reflect(x: &Self, z: &Self) -> Self {
        x * 2.0 - z
    }

    fn drs_update(z: &Self, p: &Self, x: &Self) -> Self {
        z + p - x
    }

    fn dist(&self, other: &Self) -> f64 {
        self.zip_fold(other, 0.0, |acc, a, b| acc + (a - b) * (a - b)).sqrt()
    }

    fn norm(&self) -> f64 {
        self.norm()
    }
}

/// Per-application metric definitions shared by PP and every baseline.
pub trait Metrics<T: Iterate> {
    /// The plotted constraint violation.
    fn violation(&self, x: &T) -> f64;
    fn objective(&self, x: &T) -> f64;
    /// The plotted update residual between consecutive iterates.
    fn residual(&self, new: &T, old: &T) -> f64 {
        Iterate::dist(new, old)
    }
    /// Quantity compared against `residual_tol` by the stopping rule.
    fn stop_measure(&self, new: &T, old: &T) -> f64 {
        Iterate::dist(new, old) / Iterate::norm(old).max(1.0)
    }
}

/// A problem `min f(x) s.t. ||A x - b|| <= eps` in the form the iteration consumes.
pub trait PpProblem: Metrics<Self::Point> {
    type Point: Iterate;

    fn project(&self, z: &Self::Point, tau_tol: f64) -> Result<Self::Point>;
    fn prox(&self, v: &Self::Point, alpha: f64) -> Result<Self::Point>;
    /// Raw `||A x - b||`.
    fn constraint_residual(&self, x: &Self::Point) -> f64;
    fn eps(&self) -> f64;
    /// Magnitude of the data entering the constraint, used to scale rounding slack.
    fn constraint_scale(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once the stop measure falls to this value; zero disables early stopping.
    pub residual_tol: f64,
    pub tau_tol: f64,
    pub log_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            max_iters: 1000,
            residual_tol: 1e-5,
            tau_tol: DEFAULT_TAU_TOL,
            log_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::Config(format!("residual_tol must be nonnegative, got {}", self.residual_tol)));
        }
        if !(self.tau_tol > 0.0) {
            return Err(Error::Config(format!("tau_tol must be positive, got {}", self.tau_tol)));
        }
        if self.log_every == 0 {
            return Err(Error::Config("log_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub z: T,
    pub x: T,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub k: usize,
    pub violation: f64,
    pub objective: f64,
    pub residual: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateLog {
    pub records: Vec<IterRecord>,
    /// Iterations actually performed.
    pub iterations: usize,
    pub converged: bool,
    /// Largest constraint violation seen over all iterations, logged or not.
    pub max_violation: f64,
}

impl IterateLog {
    pub fn last(&self) -> Option<&IterRecord> {
        self.records.last()
    }
}

/// Collects metric rows and evaluates the stopping rule.
pub struct Recorder<T> {
    log: IterateLog,
    prev: Option<T>,
    start: Instant,
    every: usize,
    tol: f64,
}

impl<T: Iterate> Recorder<T> {
    pub fn new(every: usize, tol: f64) -> Self {
        Self {
            log: IterateLog::default(),
            prev: None,
            start: Instant::now(),
            every: every.max(1),
            tol,
        }
    }

    /// Records iterate `k`; returns `true` when the stopping rule fires.
    pub fn push<M: Metrics<T> + ?Sized>(&mut self, k: usize, x: &T, metrics: &M, last: bool) -> bool {
        let violation = metrics.violation(x);
        self.log.max_violation = self.log.max_violation.max(violation);
        self.log.iterations = k;
        let (residual, stop) = match &self.prev {
            None => (f64::INFINITY, false),
            Some(p) => (
                metrics.residual(x, p),
                self.tol > 0.0 && metrics.stop_measure(x, p) <= self.tol,
            ),
        };
        if stop {
            self.log.converged = true;
        }
        if k.is_multiple_of(self.every) || k == 1 || last || stop {
            let now = Instant::now();
            self.log.records.push(IterRecord {
                k,
                violation,
                objective: metrics.objective(x),
                residual,
                wall_ms: now.duration_since(self.start).as_secs_f64() * 1e3,
            });
            self.start = now;
        }
        self.prev = Some(x.clone());
        stop
    }

    pub fn finish(self) -> IterateLog {
        self.log
    }
}

fn feasibility_slack<P: PpProblem + ?Sized>(p: &P, tau_tol: f64) -> f64 {
    let eps = p.eps();
    eps + 10.0 * tau_tol * (1.0 + eps) + 64.0 * f64::EPSILON * p.constraint_scale()
}

/// One sweep: `x' = P_C(z)`, `z' = z + prox(2x' - z) - x'`.
pub fn pp_step<P: PpProblem + ?Sized>(
    state: &SolverState<P::Point>,
    problem: &P,
    cfg: &SolverConfig,
) -> Result<SolverState<P::Point>> {
    let x = problem.project(&state.z, cfg.tau_tol)?;
    debug_assert!(
        problem.constraint_residual(&x) <= feasibility_slack(problem, cfg.tau_tol),
        "projected iterate violates the constraint: {} > {}",
        problem.constraint_residual(&x),
        problem.eps()
    );
    let p = problem.prox(&P::Point::reflect(&x, &state.z), cfg.alpha)?;
    let z = P::Point::drs_update(&state.z, &p, &x);
    Ok(SolverState { z, x, k: state.k + 1 })
}

/// Runs the iteration from `z0` and returns the log and the final state; the
/// solution estimate is `state.x`.
pub fn run<P: PpProblem + ?Sized>(
    problem: &P,
    z0: P::Point,
    cfg: &SolverConfig,
) -> Result<(IterateLog, SolverState<P::Point>)> {
    cfg.validate()?;
    let mut state = SolverState {
        x: z0.clone(),
        z: z0,
        k: 0,
    };
    let mut rec = Recorder::new(cfg.log_every, cfg.residual_tol);
    while state.k < cfg.max_iters {
        state = pp_step(&state, problem, cfg)?;
        let last = state.k == cfg.max_iters;
        if rec.push(state.k, &state.x, problem, last) {
            break;
        }
    }
    Ok((rec.finish(), state))
}

/// The loop order of the application algorithm boxes: reflected prox step on
/// `(z, x)` first, then `x = P_C(z)`. Starting from `x0 = P_C(z0)` this yields
/// the sequence of [`run`] shifted by one index.
pub fn run_prox_first<P: PpProblem + ?Sized>(
    problem: &P,
    z0: P::Point,
    x0: P::Point,
    cfg: &SolverConfig,
) -> Result<(IterateLog, SolverState<P::Point>)> {
    cfg.validate()?;
    let mut state = SolverState { z: z0, x: x0, k: 0 };
    let mut rec = Recorder::new(cfg.log_every, cfg.residual_tol);
    while state.k < cfg.max_iters {
        let p = problem.prox(&P::Point::reflect(&state.x, &state.z), cfg.alpha)?;
        let z = P::Point::drs_update(&state.z, &p, &state.x);
        let x = problem.project(&z, cfg.tau_tol)?;
        debug_assert!(problem.constraint_residual(&x) <= feasibility_slack(problem, cfg.tau_tol));
        state = SolverState { z, x, k: state.k + 1 };
        let last = state.k == cfg.max_iters;
        if rec.push(state.k, &state.x, problem, last) {
            break;
        }
    }
    Ok((rec.finish(), state))
}

/// `min f(x) s.t. ||A x - b|| <= eps` for a vector prox and objective.
pub struct LinearProblem<F> {
    pub spec: ConstraintSpec,
    pub f: F,
    pub objective: fn(&DenseVector) -> f64,
}

impl<F> Metrics<DenseVector> for LinearProblem<F> {
    fn violation(&self, x: &DenseVector) -> f64 {
        self.spec.violation(x)
    }

    fn objective(&self, x: &DenseVector) -> f64 {
        (self.objective)(x)
    }
}

impl<F: Prox<DenseVector>> PpProblem for LinearProblem<F> {
    type Point = DenseVector;

    fn project(&self, z: &DenseVector, tau_tol: f64) -> Result<DenseVector> {
        self.spec.project(z, tau_tol)
    }

    fn prox(&self, v: &DenseVector, alpha: f64) -> Result<DenseVector> {
        self.f.prox(v, alpha)
    }

    fn constraint_residual(&self, x: &DenseVector) -> f64 {
        self.spec.violation(x)
    }

    fn eps(&self) -> f64 {
        self.spec.eps()
    }

    fn constraint_scale(&self) -> f64 {
        1.0 + self.spec.b().norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{l1_norm, DenseMatrix};
    use crate::prox::{L1Norm, ZeroFunction};

    fn l1(x: &DenseVector) -> f64 {
        l1_norm(x)
    }

    fn problem<F>(a: DenseMatrix, b: DenseVector, eps: f64, f: F) -> LinearProblem<F> {
        LinearProblem {
            spec: ConstraintSpec::new(a, b, eps).unwrap(),
            f,
            objective: l1,
        }
    }

    fn cfg(alpha: f64, iters: usize) -> SolverConfig {
        SolverConfig {
            alpha,
            max_iters: iters,
            residual_tol: 0.0,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn one_dimensional_equality() {
        let p = problem(DenseMatrix::from_element(1, 1, 1.0), DenseVector::from_element(1, 3.0), 0.0, L1Norm);
        let mut s = SolverState {
            z: DenseVector::zeros(1),
            x: DenseVector::zeros(1),
            k: 0,
        };
        let c = cfg(1.0, 10);
        for _ in 0..10 {
            s = pp_step(&s, &p, &c).unwrap();
            assert_eq!(s.x[0], 3.0);
        }
        // z stabilizes at 2: prox(2*3 - 2) = 3
        assert_eq!(s.z[0], 2.0);
    }

    #[test]
    fn fixed_point_is_stationary() {
        let p = problem(DenseMatrix::from_element(1, 1, 1.0), DenseVector::from_element(1, 3.0), 0.0, L1Norm);
        let s = SolverState {
            z: DenseVector::from_element(1, 2.0),
            x: DenseVector::from_element(1, 3.0),
            k: 4,
        };
        let next = pp_step(&s, &p, &cfg(1.0, 1)).unwrap();
        assert_eq!(next.z, s.z);
        assert_eq!(next.x, s.x);
        assert_eq!(next.k, 5);
    }

    #[test]
    fn zero_function_step_algebra() {
        let a = DenseMatrix::from_row_slice(1, 3, &[1.0, 2.0, -1.0]);
        let p = problem(a, DenseVector::from_element(1, 1.0), 0.0, ZeroFunction);
        let z = DenseVector::from_vec(vec![0.3, -2.0, 1.5]);
        let s0 = SolverState { z: z.clone(), x: z.clone(), k: 0 };
        let c = cfg(1.0, 2);
        let s1 = pp_step(&s0, &p, &c).unwrap();
        // prox input is the reflection through the hyperplane; reflecting twice is the identity
        let r = DenseVector::reflect(&s1.x, &z);
        let x_r = p.spec.project_eps_zero(&r).unwrap();
        assert!((DenseVector::reflect(&x_r, &r) - &z).norm() < 1e-14);
        // with prox = identity the update collapses to z' = P_C(z), a fixed point
        assert!((&s1.z - &s1.x).norm() < 1e-15);
        let s2 = pp_step(&s1, &p, &c).unwrap();
        assert!((s2.z - &s1.z).norm() < 1e-14);
    }

    #[test]
    fn identity_constraint_converges_immediately() {
        let b = DenseVector::from_vec(vec![1.0, -2.0, 0.5]);
        let p = problem(DenseMatrix::identity(3, 3), b.clone(), 0.0, L1Norm);
        let (log, st) = run(&p, DenseVector::zeros(3), &SolverConfig { residual_tol: 1e-12, ..cfg(1.0, 50) }).unwrap();
        assert_eq!(st.x, b);
        assert!(log.records[0].residual.is_infinite());
        assert_eq!(log.records[1].residual, 0.0);
        assert_eq!(log.iterations, 2);
        assert!(log.converged);
    }

    #[test]
    fn log_rows_and_determinism() {
        let a = DenseMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let p = problem(a, DenseVector::from_vec(vec![1.0, 1.0]), 0.0, L1Norm);
        let c = cfg(0.5, 25);
        let (l1, s1) = run(&p, DenseVector::zeros(3), &c).unwrap();
        let (l2, s2) = run(&p, DenseVector::zeros(3), &c).unwrap();
        assert_eq!(l1.records.len(), 25);
        assert!(l1.records.windows(2).all(|w| w[0].k < w[1].k));
        assert_eq!(s1, s2);
        let strip = |l: &IterateLog| l.records.iter().map(|r| (r.k, r.violation, r.objective, r.residual)).collect::<Vec<_>>();
        assert_eq!(strip(&l1), strip(&l2));
        let sparse = run(&p, DenseVector::zeros(3), &SolverConfig { log_every: 10, ..c }).unwrap().0;
        let ks: Vec<_> = sparse.records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![1, 10, 20, 25]);
    }

    #[test]
    fn tiny_basis_pursuit_reaches_lp_optimum() {
        let a = DenseMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let p = problem(a, DenseVector::from_vec(vec![1.0, 1.0]), 0.0, L1Norm);
        let (_, st) = run(&p, DenseVector::zeros(3), &cfg(1.0, 500)).unwrap();
        assert!((st.x - DenseVector::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-8);
    }

    #[test]
    fn drs_map_is_nonexpansive_toward_fixed_point() {
        let a = DenseMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, -1.0, 0.5, 0.0, 1.0, 1.0]);
        let p = problem(a, DenseVector::from_vec(vec![1.0, 2.0]), 0.1, L1Norm);
        let c = cfg(0.7, 5000);
        let (_, star) = run(&p, DenseVector::zeros(4), &c).unwrap();
        let z_star = star.z;
        let mut s = SolverState {
            z: DenseVector::from_vec(vec![3.0, -1.0, 2.0, 0.5]),
            x: DenseVector::zeros(4),
            k: 0,
        };
        let mut d = (&s.z - &z_star).norm();
        for _ in 0..200 {
            s = pp_step(&s, &p, &c).unwrap();
            let dn = (&s.z - &z_star).norm();
            assert!(dn <= d + 1e-9);
            d = dn;
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { alpha: 0.0, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig { max_iters: 0, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig { log_every: 0, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
