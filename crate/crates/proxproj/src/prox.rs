//! Proximal operators: soft threshold, singular value threshold, ball
//! projection and masked projections.

use nalgebra::allocator::Allocator;
use nalgebra::{DefaultAllocator, Dim, Matrix, OMatrix, RawStorage};

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix, DenseVector};

/// `prox_{alpha f}` for some closed convex `f`.
pub trait Prox<T> {
    fn prox(&self, x: &T, alpha: f64) -> Result<T>;
}

#[inline]
pub fn shrink_scalar(x: f64, alpha: f64) -> f64 {
    if x > alpha {
        x - alpha
    } else if x < -alpha {
        x + alpha
    } else {
        0.0
    }
}

/// Elementwise `sgn(x) * max(|x| - alpha, 0)`.
pub fn shrink<R, C, S>(x: &Matrix<f64, R, C, S>, alpha: f64) -> OMatrix<f64, R, C>
where
    R: Dim,
    C: Dim,
    S: RawStorage<f64, R, C>,
    DefaultAllocator: Allocator<R, C>,
{
    x.map(|v| shrink_scalar(v, alpha))
}

/// `U diag(max(sigma_i - alpha, 0)) V^T`.
pub fn svt(x: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
    let f = svd(x)?;
    let keep = f.sigma.iter().take_while(|&&s| s > alpha).count();
    let (r, c) = x.shape();
    if keep == 0 {
        return Ok(DenseMatrix::zeros(r, c));
    }
    let mut us = f.u.columns(0, keep).into_owned();
    for j in 0..keep {
        us.column_mut(j).scale_mut(f.sigma[j] - alpha);
    }
    Ok(us * f.v.columns(0, keep).transpose())
}

/// Projection onto the Frobenius/Euclidean ball of `radius` about `center`.
pub fn ball_project<R, C>(x: &OMatrix<f64, R, C>, center: &OMatrix<f64, R, C>, radius: f64) -> OMatrix<f64, R, C>
where
    R: Dim,
    C: Dim,
    DefaultAllocator: Allocator<R, C>,
{
    let d = x - center;
    let dn = d.norm();
    if dn <= radius {
        return x.clone();
    }
    center + d * (radius / dn)
}

/// Observed index set of an `rows x cols` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    indices: Vec<(usize, usize)>,
    hit: Vec<bool>,
}

impl ObservationMask {
    /// Sorts and deduplicates `indices`; any index outside the shape is an error.
    pub fn new(rows: usize, cols: usize, mut indices: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(i, j)) = indices.iter().find(|&&(i, j)| i >= rows || j >= cols) {
            return Err(Error::Shape(format!("mask index ({i}, {j}) outside {rows}x{cols}")));
        }
        indices.sort_unstable();
        indices.dedup();
        let mut hit = vec![false; rows * cols];
        for &(i, j) in &indices {
            hit[i + j * rows] = true;
        }
        Ok(Self { rows, cols, indices, hit })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        let indices = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).collect();
        Self {
            rows,
            cols,
            indices,
            hit: vec![true; rows * cols],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.rows && j < self.cols && self.hit[i + j * self.rows]
    }

    fn check(&self, x: &DenseMatrix) -> Result<()> {
        if x.shape() != (self.rows, self.cols) {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, mask is {}x{}",
                x.nrows(),
                x.ncols(),
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }

    /// `||P_Omega(x)||_F` without materializing the projection.
    pub fn norm_on(&self, x: &DenseMatrix) -> Result<f64> {
        self.check(x)?;
        Ok(self.indices.iter().map(|&(i, j)| x[(i, j)] * x[(i, j)]).sum::<f64>().sqrt())
    }

    /// `||P_Omega(x - y)||_F`.
    pub fn dist_on(&self, x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self
            .indices
            .iter()
            .map(|&(i, j)| {
                let d = x[(i, j)] - y[(i, j)];
                d * d
            })
            .sum::<f64>()
            .sqrt())
    }

    /// The mask as a diagonal 0/1 operator on column-major vectorizations.
    pub fn selection_diagonal(&self) -> DenseVector {
        DenseVector::from_iterator(self.hit.len(), self.hit.iter().map(|&h| if h { 1.0 } else { 0.0 }))
    }
}

/// `P_Omega(x)`: `x` on the mask, zero elsewhere.
pub fn mask_project(x: &DenseMatrix, omega: &ObservationMask) -> Result<DenseMatrix> {
    omega.check(x)?;
    let mut out = DenseMatrix::zeros(x.nrows(), x.ncols());
    for (o, (v, &h)) in out.iter_mut().zip(x.iter().zip(&omega.hit)) {
        if h {
            *o = *v;
        }
    }
    Ok(out)
}

/// `P_Omega^perp(x)`: zero on the mask, `x` elsewhere.
pub fn mask_project_perp(x: &DenseMatrix, omega: &ObservationMask) -> Result<DenseMatrix> {
    omega.check(x)?;
    let mut out = x.clone();
    for (o, &h) in out.iter_mut().zip(&omega.hit) {
        if h {
            *o = 0.0;
        }
    }
    Ok(out)
}

/// `f = ||.||_1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct L1Norm;

impl Prox<DenseVector> for L1Norm {
    fn prox(&self, x: &DenseVector, alpha: f64) -> Result<DenseVector> {
        Ok(shrink(x, alpha))
    }
}

impl Prox<DenseMatrix> for L1Norm {
    fn prox(&self, x: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
        Ok(shrink(x, alpha))
    }
}

/// `f = ||.||_*`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NuclearNorm;

impl Prox<DenseMatrix> for NuclearNorm {
    fn prox(&self, x: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
        svt(x, alpha)
    }
}

/// `f = 0`, whose prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl<T: Clone> Prox<T> for ZeroFunction {
    fn prox(&self, x: &T, _alpha: f64) -> Result<T> {
        Ok(x.clone())
    }
}
