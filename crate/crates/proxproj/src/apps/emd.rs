//! Earth mover's distance with an L1 ground metric:
//! `min ||m||_1 s.t. ||div(m) + rho1 - rho0||_F <= eps` on an `n x n` grid.
//!
//! A flux is stored as `m = [m1; m2^T]`, a `2(n-1) x n` matrix, with the
//! Neumann boundary entries eliminated. With the backward difference
//! `K` (`n x (n-1)`), `div(m) = K m1 + m2 K^T` and `A^T b = [K^T b; K^T b^T]`.

use crate::drs::{self, IterateLog, Metrics, PpProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{l1_norm, svd, DenseMatrix};
use crate::projection::{on_or_inside, range_correction, TauBracket};
use crate::prox::shrink;

/// The divergence operator on an `n x n` grid together with the eigenbasis
/// of `K K^T`.
#[derive(Debug, Clone)]
pub struct EmdOperator {
    n: usize,
    h: f64,
    k: DenseMatrix,
    /// Orthonormal eigenvectors of `K K^T`; the last column spans constants.
    u: DenseMatrix,
    /// Eigenvalues of `K K^T`, descending, last one zero.
    s: Vec<f64>,
}

impl EmdOperator {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Shape(format!("grid size must be at least 2, got {n}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("grid spacing must be positive, got {h}")));
        }
        let k = backward_difference(n, h);
        let f = svd(&k)?;
        let mut u = DenseMatrix::zeros(n, n);
        u.columns_mut(0, n - 1).copy_from(&f.u);
        u.column_mut(n - 1).fill(1.0 / (n as f64).sqrt());
        let mut s: Vec<f64> = f.sigma.iter().map(|v| v * v).collect();
        s.push(0.0);
        Ok(Self { n, h, k, u, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> &DenseMatrix {
        &self.k
    }

    /// `sigma_max(K)^2`.
    pub fn k_norm_sq(&self) -> f64 {
        self.s[0]
    }

    /// `||A A^T||_2 = 2 sigma_max(K)^2`.
    pub fn gram_norm(&self) -> f64 {
        2.0 * self.s[0]
    }

    pub fn flux_shape(&self) -> (usize, usize) {
        (2 * (self.n - 1), self.n)
    }

    fn check_flux(&self, m: &DenseMatrix) -> Result<()> {
        if m.shape() != self.flux_shape() {
            return Err(Error::Shape(format!(
                "flux has shape {:?}, expected {:?}",
                m.shape(),
                self.flux_shape()
            )));
        }
        Ok(())
    }

    fn check_grid(&self, b: &DenseMatrix) -> Result<()> {
        if b.shape() != (self.n, self.n) {
            return Err(Error::Shape(format!(
                "grid matrix has shape {:?}, expected ({n}, {n})",
                b.shape(),
                n = self.n
            )));
        }
        Ok(())
    }

    pub fn divergence(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_flux(m)?;
        let n = self.n;
        let top = m.rows(0, n - 1);
        let bot = m.rows(n - 1, n - 1);
        Ok(&self.k * top + (&self.k * bot).transpose())
    }

    pub fn adjoint(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_grid(b)?;
        let n = self.n;
        let kt = self.k.transpose();
        let mut out = DenseMatrix::zeros(2 * (n - 1), n);
        out.rows_mut(0, n - 1).copy_from(&(&kt * b));
        out.rows_mut(n - 1, n - 1).copy_from(&(&kt * b.transpose()));
        Ok(out)
    }

    /// Projection of `z` onto `{m : ||div(m) - rhs||_F <= eps}`.
    pub fn project(&self, z: &DenseMatrix, rhs: &DenseMatrix, eps: f64, tau_tol: f64) -> Result<DenseMatrix> {
        Ok(self.project_with_tau(z, rhs, eps, tau_tol)?.0)
    }

    pub fn project_with_tau(
        &self,
        z: &DenseMatrix,
        rhs: &DenseMatrix,
        eps: f64,
        tau_tol: f64,
    ) -> Result<(DenseMatrix, Option<TauBracket>)> {
        self.check_grid(rhs)?;
        let r = self.divergence(z)? - rhs;
        let rn = r.norm();
        if on_or_inside(rn, eps) {
            return Ok((z.clone(), None));
        }
        let n = self.n;
        let c = self.u.transpose() * &r * &self.u;
        let mut eig = Vec::with_capacity(n * n - 1);
        let mut coef = Vec::with_capacity(n * n - 1);
        let mut null_sq = 0.0;
        for j in 0..n {
            for i in 0..n {
                let e = self.s[i] + self.s[j];
                if e > 0.0 {
                    eig.push(e);
                    coef.push(c[(i, j)]);
                } else {
                    null_sq += c[(i, j)] * c[(i, j)];
                }
            }
        }
        let gram = self.gram_norm();
        let (q, tau) = range_correction(&eig, &coef, null_sq, eps, rn, gram / (rn - eps), gram, tau_tol)?;
        let mut y = DenseMatrix::zeros(n, n);
        let mut it = q.into_iter();
        for j in 0..n {
            for i in 0..n {
                if self.s[i] + self.s[j] > 0.0 {
                    y[(i, j)] = it.next().unwrap_or(0.0);
                }
            }
        }
        let qm = &self.u * y * self.u.transpose();
        Ok((z - self.adjoint(&qm)?, tau))
    }
}

fn backward_difference(n: usize, h: f64) -> DenseMatrix {
    let mut k = DenseMatrix::zeros(n, n - 1);
    for i in 0..n - 1 {
        k[(i, i)] = 1.0 / h;
        k[(i + 1, i)] = -1.0 / h;
    }
    k
}

#[derive(Debug, Clone)]
pub struct EmdProblem {
    rho0: DenseMatrix,
    rho1: DenseMatrix,
    /// `rho0 - rho1`, the right-hand side of `div(m) = rho0 - rho1`.
    rhs: DenseMatrix,
    eps: f64,
    op: EmdOperator,
}

impl EmdProblem {
    /// Both densities are scaled to unit mass; `h` defaults to 1.
    pub fn new(rho0: DenseMatrix, rho1: DenseMatrix, h: Option<f64>, eps: f64) -> Result<Self> {
        if rho0.shape() != rho1.shape() || rho0.nrows() != rho0.ncols() {
            return Err(Error::Shape(format!(
                "densities must be equal square grids, got {:?} and {:?}",
                rho0.shape(),
                rho1.shape()
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::IllPosed(format!(
                "the divergence is rank deficient, eps must be positive (got {eps})"
            )));
        }
        let rho0 = normalize(rho0, "rho0")?;
        let rho1 = normalize(rho1, "rho1")?;
        let mass_gap = (rho0.sum() - rho1.sum()).abs();
        if mass_gap > 1e-12 {
            return Err(Error::IllPosed(format!("masses differ by {mass_gap:e} after normalization")));
        }
        let op = EmdOperator::new(rho0.nrows(), h.unwrap_or(1.0))?;
        let rhs = &rho0 - &rho1;
        Ok(Self { rho0, rho1, rhs, eps, op })
    }

    pub fn rho0(&self) -> &DenseMatrix {
        &self.rho0
    }

    pub fn rho1(&self) -> &DenseMatrix {
        &self.rho1
    }

    pub fn rhs(&self) -> &DenseMatrix {
        &self.rhs
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn op(&self) -> &EmdOperator {
        &self.op
    }

    pub fn zero_flux(&self) -> DenseMatrix {
        let (r, c) = self.op.flux_shape();
        DenseMatrix::zeros(r, c)
    }

    /// `||div(m) + rho1 - rho0||_F`.
    pub fn constraint_norm(&self, m: &DenseMatrix) -> f64 {
        match self.op.divergence(m) {
            Ok(d) => (d - &self.rhs).norm(),
            Err(_) => f64::NAN,
        }
    }
}

fn normalize(rho: DenseMatrix, name: &str) -> Result<DenseMatrix> {
    if rho.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::IllPosed(format!("{name} must be finite and nonnegative")));
    }
    let total = rho.sum();
    if total <= 0.0 {
        return Err(Error::IllPosed(format!("{name} has zero mass")));
    }
    Ok(rho / total)
}

pub fn emd_project(z: &DenseMatrix, p: &EmdProblem, tau_tol: f64) -> Result<DenseMatrix> {
    p.op.project(z, &p.rhs, p.eps, tau_tol)
}

impl Metrics<DenseMatrix> for EmdProblem {
    fn violation(&self, m: &DenseMatrix) -> f64 {
        self.constraint_norm(m)
    }

    fn objective(&self, m: &DenseMatrix) -> f64 {
        l1_norm(m)
    }
}

impl PpProblem for EmdProblem {
    type Point = DenseMatrix;

    fn project(&self, z: &DenseMatrix, tau_tol: f64) -> Result<DenseMatrix> {
        emd_project(z, self, tau_tol)
    }

    fn prox(&self, v: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
        Ok(shrink(v, alpha))
    }

    fn constraint_residual(&self, m: &DenseMatrix) -> f64 {
        self.constraint_norm(m)
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn constraint_scale(&self) -> f64 {
        1.0 + self.rhs.norm()
    }
}

#[derive(Debug, Clone)]
pub struct EmdSolution {
    pub flux: DenseMatrix,
    /// `||m||_1` of the final flux; with densities as cell masses this is the
    /// transport cost in units of `h`.
    pub distance: f64,
}

/// PP-EMD from `z = 0`: projection, then the reflected shrink step.
pub fn run_emd(p: &EmdProblem, cfg: &SolverConfig) -> Result<(IterateLog, EmdSolution)> {
    let (log, state) = drs::run(p, p.zero_flux(), cfg)?;
    let distance = l1_norm(&state.x);
    Ok((log, EmdSolution { flux: state.x, distance }))
}
