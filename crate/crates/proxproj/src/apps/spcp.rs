//! Stable principal component pursuit:
//! `min ||L||_* + lambda ||S||_1 s.t. ||L + S - M||_F <= eps`.
//!
//! Iterates are stored stacked as `[L; S]`, a `2 n1 x n2` matrix.

use crate::drs::{self, IterateLog, Metrics, PpProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{l1_norm, nuclear_norm, DenseMatrix};
use crate::prox::{shrink, svt};

#[derive(Debug, Clone)]
pub struct SpcpProblem {
    m: DenseMatrix,
    lambda: f64,
    eps: f64,
    m_norm: f64,
}

impl SpcpProblem {
    /// `lambda` defaults to `1 / sqrt(n1)`.
    pub fn new(m: DenseMatrix, lambda: Option<f64>, eps: f64) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::Shape("empty data matrix".into()));
        }
        let lambda = lambda.unwrap_or(1.0 / (m.nrows() as f64).sqrt());
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("eps must be nonnegative, got {eps}")));
        }
        let m_norm = m.norm();
        Ok(Self { m, lambda, eps, m_norm })
    }

    pub fn m(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn stack(&self, l: &DenseMatrix, s: &DenseMatrix) -> DenseMatrix {
        stack(l, s)
    }

    pub fn split(&self, x: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
        split(x, self.rows())
    }

    /// `||X_L + X_S - M||_F` for a stacked point.
    pub fn constraint_norm(&self, x: &DenseMatrix) -> f64 {
        let n1 = self.rows();
        let (l, s) = (x.rows(0, n1), x.rows(n1, n1));
        (l + s - &self.m).norm()
    }

    /// Figure metric `max(||X_L + X_S - M|| - eps, 0) / eps` (raw norm when `eps = 0`).
    pub fn relative_violation(&self, x: &DenseMatrix) -> f64 {
        let v = self.constraint_norm(x);
        if self.eps > 0.0 {
            (v - self.eps).max(0.0) / self.eps
        } else {
            v
        }
    }

    /// The prox of `||L||_* + lambda ||S||_1` on a stacked point.
    pub fn block_prox(&self, x: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
        let (l, s) = self.split(x);
        Ok(stack(&svt(&l, alpha)?, &shrink(&s, alpha * self.lambda)))
    }

    pub fn objective_of(&self, l: &DenseMatrix, s: &DenseMatrix) -> f64 {
        nuclear_norm(l).unwrap_or(f64::NAN) + self.lambda * l1_norm(s)
    }
}

pub fn stack(l: &DenseMatrix, s: &DenseMatrix) -> DenseMatrix {
    let (n1, n2) = l.shape();
    let mut out = DenseMatrix::zeros(2 * n1, n2);
    out.rows_mut(0, n1).copy_from(l);
    out.rows_mut(n1, n1).copy_from(s);
    out
}

pub fn split(x: &DenseMatrix, n1: usize) -> (DenseMatrix, DenseMatrix) {
    (x.rows(0, n1).into_owned(), x.rows(n1, n1).into_owned())
}

/// Projection onto `{(X_L, X_S) : ||X_L + X_S - M||_F <= eps}`.
pub fn spcp_project(zl: &DenseMatrix, zs: &DenseMatrix, m: &DenseMatrix, eps: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    if zl.shape() != m.shape() || zs.shape() != m.shape() {
        return Err(Error::Shape(format!(
            "blocks {:?} and {:?} do not match M {:?}",
            zl.shape(),
            zs.shape(),
            m.shape()
        )));
    }
    let r = zl + zs - m;
    let rn = r.norm();
    if rn <= eps {
        return Ok((zl.clone(), zs.clone()));
    }
    let mu = ((rn - eps) / (2.0 * rn)).max(0.0);
    Ok((zl - &r * mu, zs - &r * mu))
}

impl Metrics<DenseMatrix> for SpcpProblem {
    fn violation(&self, x: &DenseMatrix) -> f64 {
        self.relative_violation(x)
    }

    fn objective(&self, x: &DenseMatrix) -> f64 {
        let (l, s) = self.split(x);
        self.objective_of(&l, &s)
    }

    fn residual(&self, new: &DenseMatrix, old: &DenseMatrix) -> f64 {
        drs::Iterate::dist(new, old) / self.m_norm.max(f64::MIN_POSITIVE)
    }

    fn stop_measure(&self, new: &DenseMatrix, old: &DenseMatrix) -> f64 {
        self.residual(new, old)
    }
}

impl PpProblem for SpcpProblem {
    type Point = DenseMatrix;

    fn project(&self, z: &DenseMatrix, _tau_tol: f64) -> Result<DenseMatrix> {
        let (zl, zs) = self.split(z);
        let (xl, xs) = spcp_project(&zl, &zs, &self.m, self.eps)?;
        Ok(stack(&xl, &xs))
    }

    fn prox(&self, v: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
        self.block_prox(v, alpha)
    }

    fn constraint_residual(&self, x: &DenseMatrix) -> f64 {
        self.constraint_norm(x)
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn constraint_scale(&self) -> f64 {
        1.0 + self.m_norm
    }
}

/// Result of a PP-SPCP run.
#[derive(Debug, Clone)]
pub struct SpcpSolution {
    pub l: DenseMatrix,
    pub s: DenseMatrix,
    /// Final governing iterate `[Z_L; Z_S]`.
    pub z: DenseMatrix,
}

/// PP-SPCP from `Z_L = X_L = M`, `Z_S = X_S = 0`, prox step before projection.
pub fn run_spcp(p: &SpcpProblem, cfg: &SolverConfig) -> Result<(IterateLog, SpcpSolution)> {
    let start = stack(&p.m, &DenseMatrix::zeros(p.m.nrows(), p.m.ncols()));
    let (log, state) = drs::run_prox_first(p, start.clone(), start, cfg)?;
    let (l, s) = p.split(&state.x);
    Ok((log, SpcpSolution { l, s, z: state.z }))
}

/// The `{Z^k}` sequence of PP-SPCP for `k = 1..=iters`, starting from `Z^1 = (M, 0)`.
pub fn spcp_z_sequence(p: &SpcpProblem, alpha: f64, iters: usize) -> Result<Vec<DenseMatrix>> {
    let mut z = stack(&p.m, &DenseMatrix::zeros(p.m.nrows(), p.m.ncols()));
    let mut x = z.clone();
    let mut out = vec![z.clone()];
    for _ in 1..iters {
        let v = drs::Iterate::reflect(&x, &z);
        let pr = p.block_prox(&v, alpha)?;
        z = drs::Iterate::drs_update(&z, &pr, &x);
        x = p.project(&z, 0.0)?;
        out.push(z.clone());
    }
    Ok(out)
}

/// Proximal gradient on `||L||_* + lambda ||S||_1 + ||L + S - M||^2 / (2 mu)`
/// with step `alpha = mu`, from `X^1 = (M, 0)`:
/// `X_L' = svt(M - X_S, alpha)`, `X_S' = shrink(M - X_L, alpha lambda)`.
pub fn spcp_pg_sequence(p: &SpcpProblem, alpha: f64, iters: usize) -> Result<Vec<DenseMatrix>> {
    let mut l = p.m.clone();
    let mut s = DenseMatrix::zeros(p.m.nrows(), p.m.ncols());
    let mut out = vec![stack(&l, &s)];
    for _ in 1..iters {
        let nl = svt(&(&p.m - &s), alpha)?;
        let ns = shrink(&(&p.m - &l), alpha * p.lambda);
        l = nl;
        s = ns;
        out.push(stack(&l, &s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseVector;
    use crate::projection::{ConstraintSpec, DEFAULT_TAU_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn feasible_pair_unchanged() {
        let m = DenseMatrix::from_element(2, 2, 1.0);
        let zl = DenseMatrix::from_element(2, 2, 0.6);
        let zs = DenseMatrix::from_element(2, 2, 0.5);
        let (xl, xs) = spcp_project(&zl, &zs, &m, 1.0).unwrap();
        assert_eq!((xl, xs), (zl, zs));
    }

    #[test]
    fn exact_constraint_halves_residual() {
        let w = DenseMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 3.0]);
        let (xl, xs) = spcp_project(&w, &w, &DenseMatrix::zeros(2, 2), 0.0).unwrap();
        assert_eq!(xl, DenseMatrix::zeros(2, 2));
        assert_eq!(xs, DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn matches_generic_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 9;
        let mut a = DenseMatrix::zeros(n, 2 * n);
        for i in 0..n {
            a[(i, i)] = 1.0;
            a[(i, n + i)] = 1.0;
        }
        for _ in 0..20 {
            let mut r = || DenseMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let (m, zl, zs) = (r(), r(), r());
            let spec = ConstraintSpec::new(a.clone(), DenseVector::from_column_slice(m.as_slice()), 0.2).unwrap();
            let mut v = zl.as_slice().to_vec();
            v.extend_from_slice(zs.as_slice());
            let u = spec.project(&DenseVector::from_vec(v), DEFAULT_TAU_TOL).unwrap();
            let (xl, xs) = spcp_project(&zl, &zs, &m, 0.2).unwrap();
            assert!((DenseVector::from_column_slice(xl.as_slice()) - u.rows(0, n)).norm() < 1e-10);
            assert!((DenseVector::from_column_slice(xs.as_slice()) - u.rows(n, n)).norm() < 1e-10);
            assert!((&xl + &xs - &m).norm() <= 0.2 + 1e-12 * 1.2);
        }
    }

    #[test]
    fn zero_data_stays_at_origin() {
        let p = SpcpProblem::new(DenseMatrix::zeros(4, 3), None, 0.0).unwrap();
        let (log, sol) = run_spcp(&p, &SolverConfig { max_iters: 5, ..SolverConfig::default() }).unwrap();
        assert_eq!(sol.l, DenseMatrix::zeros(4, 3));
        assert_eq!(sol.s, DenseMatrix::zeros(4, 3));
        assert!(log.max_violation == 0.0);
    }

    #[test]
    fn rank_one_with_large_lambda() {
        let u = DenseVector::from_vec(vec![1.0, 2.0, -1.0, 0.5, 1.5]);
        let v = DenseVector::from_vec(vec![0.3, -1.0, 2.0, 1.0]);
        let m = &u * v.transpose();
        let p = SpcpProblem::new(m.clone(), Some(10.0), 0.0).unwrap();
        let cfg = SolverConfig {
            alpha: 0.5,
            max_iters: 500,
            residual_tol: 0.0,
            ..SolverConfig::default()
        };
        let (log, sol) = run_spcp(&p, &cfg).unwrap();
        assert!(sol.s.norm() < 1e-8);
        assert!(nuclear_norm(&sol.l).unwrap() <= nuclear_norm(&m).unwrap() + 1e-8);
        assert!(log.max_violation <= 1e-12 * (1.0 + m.norm()));
    }

    #[test]
    fn logged_iterates_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DenseMatrix::from_fn(8, 6, |_, _| rng.random_range(-1.0..1.0));
        let p = SpcpProblem::new(m, None, 0.3).unwrap();
        let cfg = SolverConfig {
            max_iters: 100,
            residual_tol: 0.0,
            ..SolverConfig::default()
        };
        let (log, _) = run_spcp(&p, &cfg).unwrap();
        assert_eq!(log.records.len(), 100);
        assert!(log.max_violation <= 1e-12);
    }
}
