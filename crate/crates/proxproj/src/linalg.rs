//! Dense linear algebra kernels: thin SVD, SPD solves and the Thomas algorithm.
//!
//! Matrices and vectors are plain `nalgebra` dynamic types; the SVD runs on
//! `faer` (single-threaded). Everything here is
//! a pure function of its inputs, so results are reproducible bit-for-bit
//! within a build.

use nalgebra::linalg::Cholesky;
use nalgebra::Dyn;

use crate::error::{Error, Result};

pub type DenseMatrix = nalgebra::DMatrix<f64>;
pub type DenseVector = nalgebra::DVector<f64>;

/// Relative cutoff below which a singular value is treated as exactly zero
/// whenever it would be used as a divisor.
pub const SINGULAR_CUTOFF: f64 = 1e-12;


/// Thin singular value decomposition `A = U diag(sigma) V^T`.
///
/// `sigma` is sorted in descending order; `u` is `rows x k` and `v` is
/// `cols x k` with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: DenseVector,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn rank_dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().copied().fold(0.0, f64::max)
    }

    /// Singular values with everything below `SINGULAR_CUTOFF * sigma_max` zeroed.
    pub fn sigma_truncated(&self) -> DenseVector {
        let cut = SINGULAR_CUTOFF * self.sigma_max();
        self.sigma.map(|s| if s > cut { s } else { 0.0 })
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

fn check_finite(a: &DenseMatrix, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::IllConditioned(format!("{what} contains non-finite entries")))
    }
}

/// Thin SVD with singular values in descending order.
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Shape(format!("cannot factor an empty {rows}x{cols} matrix")));
    }
    check_finite(a, "matrix")?;
    let fa = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let dec = fa.thin_svd().map_err(|_| Error::Factorization { rows, cols })?;
    let (fu, fv) = (dec.U(), dec.V());
    let k = rows.min(cols);
    let s = dec.S().column_vector();
    let u = DenseMatrix::from_fn(rows, k, |i, j| fu[(i, j)]);
    let v = DenseMatrix::from_fn(cols, k, |i, j| fv[(i, j)]);
    let sigma = DenseVector::from_fn(k, |i, _| s[i].max(0.0));
    Ok(Svd { u, sigma, v })
}

/// Spectral norm `sigma_max(A)`.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(svd(a)?.sigma_max())
}

pub fn nuclear_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(svd(a)?.sigma.sum())
}

pub fn l1_norm<R: nalgebra::Dim, C: nalgebra::Dim, S>(a: &nalgebra::Matrix<f64, R, C, S>) -> f64
where
    S: nalgebra::RawStorage<f64, R, C>,
{
    a.iter().map(|v| v.abs()).sum()
}

/// A factor-once / solve-many Cholesky factorization of an SPD matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(g: &DenseMatrix) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(Error::Shape(format!("SPD matrix must be square, got {}x{}", n, g.ncols())));
        }
        check_finite(g, "SPD matrix")?;
        let chol = Cholesky::new(g.clone()).ok_or(Error::NotSpd { dim: n })?;
        Ok(Self { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, r: &DenseVector) -> Result<DenseVector> {
        if r.len() != self.dim() {
            return Err(Error::Shape(format!(
                "right-hand side has length {}, expected {}",
                r.len(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(r))
    }
}

/// Solve `G y = r` for symmetric positive definite `G`.
pub fn spd_solve(g: &DenseMatrix, r: &DenseVector) -> Result<DenseVector> {
    SpdFactor::new(g)?.solve(r)
}

/// Square tridiagonal matrix stored by its three diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub sub: DenseVector,
    pub diag: DenseVector,
    pub sup: DenseVector,
}

impl Tridiagonal {
    pub fn new(sub: DenseVector, diag: DenseVector, sup: DenseVector) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::Shape(format!(
                "tridiagonal bands have lengths {}/{}/{}",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut t = DenseMatrix::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = self.diag[i];
            if i + 1 < n {
                t[(i + 1, i)] = self.sub[i];
                t[(i, i + 1)] = self.sup[i];
            }
        }
        t
    }

    pub fn mul_vec(&self, y: &DenseVector) -> DenseVector {
        let n = self.dim();
        DenseVector::from_fn(n, |i, _| {
            let mut acc = self.diag[i] * y[i];
            if i > 0 {
                acc += self.sub[i - 1] * y[i - 1];
            }
            if i + 1 < n {
                acc += self.sup[i] * y[i + 1];
            }
            acc
        })
    }

    /// Thomas algorithm: forward elimination then back substitution, O(n).
    pub fn solve(&self, r: &DenseVector) -> Result<DenseVector> {
        let n = self.dim();
        if r.len() != n {
            return Err(Error::Shape(format!("right-hand side has length {}, expected {n}", r.len())));
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularTridiagonal { row: 0 });
        }
        if n > 1 {
            c[0] = self.sup[0] / pivot;
        }
        d[0] = r[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.sub[i - 1] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularTridiagonal { row: i });
            }
            if i + 1 < n {
                c[i] = self.sup[i] / pivot;
            }
            d[i] = (r[i] - self.sub[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(DenseVector::from_vec(d))
    }
}

pub fn thomas_solve(t: &Tridiagonal, r: &DenseVector) -> Result<DenseVector> {
    t.solve(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn assert_svd_invariants(a: &DenseMatrix, f: &Svd) {
        let k = f.rank_dim();
        let eye = DenseMatrix::identity(k, k);
        assert!((f.u.transpose() * &f.u - &eye).norm() <= 1e-10 * k as f64);
        assert!((f.v.transpose() * &f.v - &eye).norm() <= 1e-10 * k as f64);
        for w in f.sigma.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        assert!((f.reconstruct() - a).norm() <= 1e-8 * (1.0 + a.norm()));
    }

    #[test]
    fn svd_of_identity() {
        let f = svd(&DenseMatrix::identity(3, 3)).unwrap();
        assert_eq!(f.sigma.as_slice(), &[1.0, 1.0, 1.0]);
        assert!((f.reconstruct() - DenseMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn svd_of_diagonal_with_zero() {
        let a = DenseMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.0]);
        let f = svd(&a).unwrap();
        assert!((f.sigma[0] - 3.0).abs() < 1e-15);
        assert!(f.sigma[1].abs() < 1e-15);
    }

    #[test]
    fn svd_random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(r, c) in &[(5, 3), (3, 5), (1, 7), (7, 1), (12, 12), (40, 17)] {
            let a = random_matrix(&mut rng, r, c);
            let f = svd(&a).unwrap();
            assert_svd_invariants(&a, &f);
        }
    }

    #[test]
    fn svd_rejects_empty_and_nan() {
        assert!(matches!(svd(&DenseMatrix::zeros(0, 3)), Err(Error::Shape(_))));
        let mut a = DenseMatrix::identity(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(svd(&a).is_err());
    }

    #[test]
    fn spd_solve_trivial() {
        let y = spd_solve(&DenseMatrix::identity(2, 2), &DenseVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 2.0]);
        let y = spd_solve(&DenseMatrix::from_element(1, 1, 2.0), &DenseVector::from_vec(vec![4.0])).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spd_solve_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_matrix(&mut rng, 6, 6);
        let g = &b * b.transpose() + DenseMatrix::identity(6, 6) * 0.1;
        let r = DenseVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let f = SpdFactor::new(&g).unwrap();
        let y = f.solve(&r).unwrap();
        assert!((&g * &y - &r).norm() <= 1e-10 * (1.0 + r.norm()));
        // factor once, solve many
        let y2 = f.solve(&(&r * 2.0)).unwrap();
        assert!((y2 - y * 2.0).norm() < 1e-12);
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let g = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(SpdFactor::new(&g), Err(Error::NotSpd { dim: 2 })));
    }

    #[test]
    fn thomas_identity_and_2x2() {
        let n = 4;
        let t = Tridiagonal::new(
            DenseVector::zeros(n - 1),
            DenseVector::from_element(n, 1.0),
            DenseVector::zeros(n - 1),
        )
        .unwrap();
        let r = DenseVector::from_vec(vec![1.0, -2.0, 3.5, 0.25]);
        assert_eq!(t.solve(&r).unwrap(), r);

        let t = Tridiagonal::new(
            DenseVector::from_vec(vec![1.0]),
            DenseVector::from_vec(vec![2.0, 2.0]),
            DenseVector::from_vec(vec![1.0]),
        )
        .unwrap();
        let y = t.solve(&DenseVector::from_vec(vec![3.0, 3.0])).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn thomas_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 50;
        let sub = DenseVector::from_fn(n - 1, |_, _| rng.random_range(-1.0..1.0));
        let sup = DenseVector::from_fn(n - 1, |_, _| rng.random_range(-1.0..1.0));
        let diag = DenseVector::from_fn(n, |_, _| 2.5 + rng.random_range(0.0..1.0));
        let t = Tridiagonal::new(sub, diag, sup).unwrap();
        let r = DenseVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let y = t.solve(&r).unwrap();
        assert!((t.mul_vec(&y) - &r).norm() <= 1e-10 * (1.0 + r.norm()));
        let dense = t.to_dense().lu().solve(&r).unwrap();
        assert!((y - dense).norm() <= 1e-9 * (1.0 + r.norm()));
    }

    #[test]
    fn thomas_reports_zero_pivot() {
        let t = Tridiagonal::new(
            DenseVector::from_vec(vec![1.0]),
            DenseVector::from_vec(vec![0.0, 1.0]),
            DenseVector::from_vec(vec![1.0]),
        )
        .unwrap();
        assert!(matches!(
            t.solve(&DenseVector::from_vec(vec![1.0, 1.0])),
            Err(Error::SingularTridiagonal { row: 0 })
        ));
    }

    #[test]
    fn bands_must_have_consistent_lengths() {
        assert!(Tridiagonal::new(DenseVector::zeros(2), DenseVector::zeros(2), DenseVector::zeros(1)).is_err());
    }
}
