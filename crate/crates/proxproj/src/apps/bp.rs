//! Basis pursuit: `min ||x||_1 s.t. A x = b`.

use crate::drs::{self, IterateLog, Metrics, PpProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{l1_norm, DenseMatrix, DenseVector};
use crate::projection::ConstraintSpec;
use crate::prox::shrink;

#[derive(Debug, Clone)]
pub struct BpProblem {
    spec: ConstraintSpec,
}

impl BpProblem {
    /// `A` must have full row rank.
    pub fn new(a: DenseMatrix, b: DenseVector) -> Result<Self> {
        if a.nrows() > a.ncols() {
            return Err(Error::IllPosed(format!(
                "basis pursuit needs at most as many rows as columns, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(Self {
            spec: ConstraintSpec::new(a, b, 0.0)?,
        })
    }

    pub fn a(&self) -> &DenseMatrix {
        self.spec.a()
    }

    pub fn b(&self) -> &DenseVector {
        self.spec.b()
    }

    pub fn spec(&self) -> &ConstraintSpec {
        &self.spec
    }

    /// `||A A^T||_2 = ||A^T A||_2 = sigma_max(A)^2`.
    pub fn gram_norm(&self) -> f64 {
        self.spec.sigma_max().powi(2)
    }

    pub fn dim(&self) -> usize {
        self.spec.a().ncols()
    }
}

impl Metrics<DenseVector> for BpProblem {
    fn violation(&self, x: &DenseVector) -> f64 {
        self.spec.violation(x)
    }

    fn objective(&self, x: &DenseVector) -> f64 {
        l1_norm(x)
    }
}

impl PpProblem for BpProblem {
    type Point = DenseVector;

    fn project(&self, z: &DenseVector, _tau_tol: f64) -> Result<DenseVector> {
        self.spec.project_eps_zero(z)
    }

    fn prox(&self, v: &DenseVector, alpha: f64) -> Result<DenseVector> {
        Ok(shrink(v, alpha))
    }

    fn constraint_residual(&self, x: &DenseVector) -> f64 {
        self.spec.violation(x)
    }

    fn eps(&self) -> f64 {
        0.0
    }

    fn constraint_scale(&self) -> f64 {
        1.0 + self.spec.b().norm()
    }
}

/// PP with the cached `(A A^T)^{-1}` factorization and the shrink prox, from `z = 0`.
pub fn run_bp(p: &BpProblem, cfg: &SolverConfig) -> Result<(IterateLog, DenseVector)> {
    let (log, state) = drs::run(p, DenseVector::zeros(p.dim()), cfg)?;
    Ok((log, state.x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_b() {
        let b = DenseVector::from_vec(vec![0.5, -1.0, 2.0]);
        let p = BpProblem::new(DenseMatrix::identity(3, 3), b.clone()).unwrap();
        let (_, x) = run_bp(&p, &SolverConfig { max_iters: 5, ..SolverConfig::default() }).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn three_column_example() {
        let a = DenseMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let p = BpProblem::new(a, DenseVector::from_vec(vec![1.0, 1.0])).unwrap();
        let cfg = SolverConfig {
            alpha: 0.5,
            max_iters: 2000,
            residual_tol: 1e-14,
            ..SolverConfig::default()
        };
        let (log, x) = run_bp(&p, &cfg).unwrap();
        assert!((x - DenseVector::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-9);
        assert!(log.max_violation <= 1e-12);
    }

    #[test]
    fn rank_deficient_is_ill_posed() {
        let a = DenseMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        let err = BpProblem::new(a, DenseVector::from_vec(vec![1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::IllPosed(_)));
    }
}
