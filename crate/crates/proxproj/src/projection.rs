//! Exact Euclidean projection onto `C = {x : ||Ax - b|| <= eps}`.
//!
//! For an infeasible point the projection is
//! `x - A^T (A A^T + eps*tau*I)^{-1} (A x - b)` where `tau > 0` is the unique
//! root of `g(tau) = tau * ||(A A^T + eps*tau*I)^{-1} (A x - b)|| = 1`.
//! In the eigenbasis of `A A^T` (eigenvalues `s_i = sigma_i^2`, residual
//! coordinates `c_i`) this reads
//!
//! ```text
//! g(tau)^2 = sum_i (tau * c_i / (s_i + eps*tau))^2
//! ```
//!
//! which is strictly increasing in `tau`, so a safeguarded Newton/bisection
//! iteration on `h = g^2 - 1` finds the root inside `(0, sigma_max^2 / (||r|| - eps)]`.

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix, DenseVector, SpdFactor, Svd};

pub const DEFAULT_TAU_TOL: f64 = 1e-12;

const TAU_MAX_ITERS: usize = 200;
/// Below `eps * tau_hi < TINY_EPS_RATIO * sigma_max^2` the `eps*tau` shift is
/// under rounding and the projection is taken through the affine limit.
const TINY_EPS_RATIO: f64 = 1e-14;
/// Relative rank threshold used when `eps = 0` requires full row rank.
const RANK_TOL: f64 = 1e-10;
/// Relative tolerance on `b` lying in the range of `A`.
const RANGE_TOL: f64 = 1e-10;

/// `||r|| <= eps` up to a few ulps. Points this close to the sphere are
/// returned unchanged: the tau equation cannot resolve them.
pub(crate) fn on_or_inside(rn: f64, eps: f64) -> bool {
    rn <= eps * (1.0 + 8.0 * f64::EPSILON)
}

/// Result of the scalar root search for `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauBracket {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
}

/// The tau equation written in spectral coordinates.
///
/// `eig[i]` are eigenvalues of `A A^T` restricted to its range (all `> 0`),
/// `coef[i]` the residual coordinates along them. `null_sq` is the squared
/// norm of the residual component in the kernel of `A A^T`; it contributes the
/// constant `null_sq / eps^2` to `g^2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SpectralTau<'a> {
    pub eig: &'a [f64],
    pub coef: &'a [f64],
    pub null_sq: f64,
    pub eps: f64,
}

impl SpectralTau<'_> {
    /// Returns `(g(tau)^2 - 1, d/dtau g(tau)^2)`.
    fn eval(&self, tau: f64) -> (f64, f64) {
        let mut g2 = 0.0;
        let mut dg2 = 0.0;
        for (&s, &c) in self.eig.iter().zip(self.coef) {
            let d = s + self.eps * tau;
            let t = tau * c / d;
            g2 += t * t;
            dg2 += 2.0 * tau * c * c * s / (d * d * d);
        }
        if self.null_sq > 0.0 {
            g2 += self.null_sq / (self.eps * self.eps);
        }
        (g2 - 1.0, dg2)
    }

    /// Root of `g(tau) = 1` searched from the bracket `(0, hi]`.
    pub fn solve(&self, hi: f64, tol: f64) -> Result<TauBracket> {
        if self.eps == 0.0 {
            // g is linear in tau
            let w: f64 = self
                .eig
                .iter()
                .zip(self.coef)
                .map(|(s, c)| (c / s) * (c / s))
                .sum::<f64>()
                .sqrt();
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::IllConditioned(format!("degenerate tau equation (weight {w:e})")));
            }
            let root = 1.0 / w;
            return Ok(TauBracket { lo: 0.0, hi: hi.max(root), root });
        }
        safeguarded_root(|t| self.eval(t), hi, tol)
    }
}

/// Safeguarded Newton iteration for the increasing function `h` with
/// `h(0+) < 0`, starting from the bracket `(0, hi]`.
fn safeguarded_root<F>(mut h: F, hi: f64, tol: f64) -> Result<TauBracket>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(hi > 0.0 && hi.is_finite()) {
        return Err(Error::IllConditioned(format!("invalid tau bracket upper end {hi:e}")));
    }
    let mut lo = 0.0_f64;
    let mut hi = hi;
    let (mut h_hi, _) = h(hi);
    if !h_hi.is_finite() {
        return Err(Error::IllConditioned("tau equation is not finite at the bracket end".into()));
    }
    // The bracket end is an analytic bound; rounding can leave it a hair short.
    let mut grow = 0;
    while h_hi < 0.0 {
        grow += 1;
        if grow > 60 {
            return Err(Error::IllConditioned("could not bracket tau".into()));
        }
        lo = hi;
        hi *= 2.0;
        h_hi = h(hi).0;
    }

    let defect = |hv: f64| ((hv + 1.0).max(0.0).sqrt() - 1.0).abs();
    let mut best = (hi, defect(h_hi));
    let mut tau = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
    for _ in 0..TAU_MAX_ITERS {
        let (hv, dh) = h(tau);
        if !hv.is_finite() {
            return Err(Error::IllConditioned(format!("tau equation is not finite at {tau:e}")));
        }
        let d = defect(hv);
        if d < best.1 {
            best = (tau, d);
        }
        if d <= tol {
            return Ok(TauBracket { lo, hi, root: tau });
        }
        if hv < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            // bracket has collapsed to rounding; best is as good as it gets
            return Ok(TauBracket { lo, hi, root: best.0 });
        }
        let newton = tau - hv / dh;
        tau = if dh > 0.0 && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 {
            (lo * hi).sqrt().clamp(lo, hi).max(0.5 * (lo + hi) * 1e-3 + lo)
        } else {
            0.5 * hi
        };
        if tau <= lo || tau >= hi {
            tau = 0.5 * (lo + hi);
        }
    }
    Err(Error::TauConvergence { best_tau: best.0, defect: best.1 })
}

/// Splits `r` into coordinates along the retained singular directions and the
/// squared norm of everything else.
fn spectral_parts(svd: &Svd, r: &DenseVector) -> (Vec<f64>, Vec<f64>, f64) {
    let sig = svd.sigma_truncated();
    let c_all = svd.u.transpose() * r;
    let mut eig = Vec::with_capacity(sig.len());
    let mut coef = Vec::with_capacity(sig.len());
    let mut rest = r.clone();
    for (j, (s, c)) in sig.iter().zip(c_all.iter()).enumerate() {
        if *s > 0.0 {
            eig.push(s * s);
            coef.push(*c);
            rest.axpy(-*c, &svd.u.column(j), 1.0);
        }
    }
    let null_sq = rest.norm_squared();
    (eig, coef, null_sq)
}

/// Finds `tau` for the residual `r = A x - b` using the SVD of `A`.
pub fn solve_tau(svd: &Svd, r: &DenseVector, eps: f64, tol: f64) -> Result<TauBracket> {
    let rn = r.norm();
    if rn <= eps {
        return Err(Error::Config(format!(
            "tau is only defined for infeasible points (||r|| = {rn:e} <= eps = {eps:e})"
        )));
    }
    let (eig, coef, null_sq) = spectral_parts(svd, r);
    let null_sq = effective_null_sq(null_sq, eps, rn)?;
    let eq = SpectralTau {
        eig: &eig,
        coef: &coef,
        null_sq,
        eps,
    };
    let smax = svd.sigma_max();
    eq.solve(smax * smax / (rn - eps), tol)
}

/// Coordinates `q_i` of `(A A^T + eps*tau*I)^{-1} r` along the nonzero
/// eigenvalues `eig` of `A A^T`, given residual coordinates `coef` and the
/// squared out-of-range residual `null_sq`. The out-of-range part of `q` is
/// annihilated by `A^T` and is not returned.
#[allow(clippy::too_many_arguments)]
pub(crate) fn range_correction(
    eig: &[f64],
    coef: &[f64],
    null_sq: f64,
    eps: f64,
    rn: f64,
    hi: f64,
    smax2: f64,
    tol: f64,
) -> Result<(Vec<f64>, Option<TauBracket>)> {
    let null_sq = effective_null_sq(null_sq, eps, rn)?;
    if eps == 0.0 || eps * hi < TINY_EPS_RATIO * smax2 {
        // Affine projection, then step back toward x so the residual norm is eps.
        let range_norm = coef.iter().map(|v| v * v).sum::<f64>().sqrt();
        let keep = if eps == 0.0 || range_norm == 0.0 {
            0.0
        } else {
            (eps * eps - null_sq).max(0.0).sqrt() / range_norm
        };
        let q = eig.iter().zip(coef).map(|(s, c)| (1.0 - keep) * c / s).collect();
        return Ok((q, None));
    }
    let eq = SpectralTau { eig, coef, null_sq, eps };
    let tau = eq.solve(hi, tol)?;
    let shift = eps * tau.root;
    let q = eig.iter().zip(coef).map(|(s, c)| c / (s + shift)).collect();
    Ok((q, Some(tau)))
}

/// Returns the squared out-of-range residual norm that enters the tau
/// equation; components at rounding level are dropped.
fn effective_null_sq(null_sq: f64, eps: f64, scale: f64) -> Result<f64> {
    let null_norm = null_sq.sqrt();
    if null_norm <= RANGE_TOL * (1.0 + scale) {
        return Ok(0.0);
    }
    if eps == 0.0 {
        return Err(Error::IllPosed(format!(
            "residual has a component of norm {null_norm:e} outside the range of A with eps = 0"
        )));
    }
    if null_norm >= eps {
        return Err(Error::IllPosed(format!(
            "residual component outside the range of A ({null_norm:e}) is not below eps = {eps:e}"
        )));
    }
    Ok(null_sq)
}

/// `(A, b, eps)` with cached factorizations.
#[derive(Debug, Clone)]
pub struct ConstraintSpec {
    a: DenseMatrix,
    b: DenseVector,
    eps: f64,
    sigma_max: f64,
    svd: Option<Svd>,
    gram: Option<DenseMatrix>,
    gram_factor: Option<SpdFactor>,
}

impl ConstraintSpec {
    /// Validates the constraint and caches the SVD of `A` (plus a Cholesky
    /// factor of `A A^T` when `eps = 0`).
    ///
    /// With `eps = 0` the matrix must have full row rank; in every case `b`
    /// must lie in the range of `A`.
    pub fn new(a: DenseMatrix, b: DenseVector, eps: f64) -> Result<Self> {
        let (m, n) = a.shape();
        if b.len() != m {
            return Err(Error::Shape(format!("b has length {}, A has {m} rows", b.len())));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("eps must be finite and nonnegative, got {eps}")));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllConditioned("b contains non-finite entries".into()));
        }
        let f = svd(&a)?;
        let smax = f.sigma_max();
        if eps == 0.0 {
            let full_rank = m <= n && f.sigma.iter().all(|&s| s > RANK_TOL * smax) && smax > 0.0;
            if !full_rank {
                return Err(Error::IllPosed(format!(
                    "eps = 0 requires A ({m}x{n}) to have full row rank"
                )));
            }
        }
        let (_, _, null_sq) = spectral_parts(&f, &b);
        if null_sq.sqrt() > RANGE_TOL * (1.0 + b.norm()) {
            return Err(Error::IllPosed(format!(
                "b is not in the range of A (distance {:e})",
                null_sq.sqrt()
            )));
        }
        let (gram, gram_factor) = if eps == 0.0 {
            let g = &a * a.transpose();
            let factor = SpdFactor::new(&g)?;
            (Some(g), Some(factor))
        } else {
            (None, None)
        };
        Ok(Self {
            a,
            b,
            eps,
            sigma_max: smax,
            svd: Some(f),
            gram,
            gram_factor,
        })
    }

    /// Drops the SVD cache so projections go through dense SPD solves.
    pub fn without_svd_cache(mut self) -> Self {
        if self.gram.is_none() {
            self.gram = Some(&self.a * self.a.transpose());
        }
        self.svd = None;
        self
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseVector {
        &self.b
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn svd(&self) -> Option<&Svd> {
        self.svd.as_ref()
    }

    pub fn residual(&self, x: &DenseVector) -> DenseVector {
        &self.a * x - &self.b
    }

    pub fn violation(&self, x: &DenseVector) -> f64 {
        self.residual(x).norm()
    }

    fn check_len(&self, x: &DenseVector) -> Result<()> {
        if x.len() != self.a.ncols() {
            return Err(Error::Shape(format!(
                "point has length {}, A has {} columns",
                x.len(),
                self.a.ncols()
            )));
        }
        Ok(())
    }

    /// Projects `x` onto the constraint set. Feasible points are returned unchanged.
    pub fn project(&self, x: &DenseVector, tol: f64) -> Result<DenseVector> {
        Ok(self.project_with_tau(x, tol)?.0)
    }

    /// Like [`project`](Self::project) but also reports the tau used, when a
    /// root search was needed.
    pub fn project_with_tau(&self, x: &DenseVector, tol: f64) -> Result<(DenseVector, Option<TauBracket>)> {
        self.check_len(x)?;
        let r = self.residual(x);
        let rn = r.norm();
        if on_or_inside(rn, self.eps) {
            return Ok((x.clone(), None));
        }
        match &self.svd {
            Some(f) => self.project_svd(f, x, &r, rn, tol),
            None => self.project_gram(x, &r, rn, tol),
        }
    }

    fn project_svd(
        &self,
        f: &Svd,
        x: &DenseVector,
        r: &DenseVector,
        rn: f64,
        tol: f64,
    ) -> Result<(DenseVector, Option<TauBracket>)> {
        let smax2 = self.sigma_max * self.sigma_max;
        let (eig, coef, null_sq) = spectral_parts(f, r);
        let (q, tau) = range_correction(&eig, &coef, null_sq, self.eps, rn, smax2 / (rn - self.eps), smax2, tol)?;
        let sig = f.sigma_truncated();
        let mut w = DenseVector::zeros(sig.len());
        let mut j = 0;
        for (i, s) in sig.iter().enumerate() {
            if *s > 0.0 {
                w[i] = s * q[j];
                j += 1;
            }
        }
        Ok((x - &f.v * w, tau))
    }

    fn project_gram(
        &self,
        x: &DenseVector,
        r: &DenseVector,
        rn: f64,
        tol: f64,
    ) -> Result<(DenseVector, Option<TauBracket>)> {
        if self.eps == 0.0 {
            return Ok((self.project_eps_zero(x)?, None));
        }
        let gram = self
            .gram
            .as_ref()
            .ok_or_else(|| Error::Config("no Gram matrix cached".into()))?;
        let m = gram.nrows();
        let eps = self.eps;
        let solve_at = |tau: f64| -> Result<(SpdFactor, DenseVector)> {
            let g = gram + DenseMatrix::identity(m, m) * (eps * tau);
            let f = SpdFactor::new(&g)?;
            let y = f.solve(r)?;
            Ok((f, y))
        };
        let mut failure = None;
        let hi = self.sigma_max * self.sigma_max / (rn - eps);
        let tau = safeguarded_root(
            |t| match solve_at(t) {
                Ok((f, y)) => {
                    let yy = y.norm_squared();
                    // d/dt (t^2 |y|^2) with y' = -eps G^{-1} y
                    let dy = f.solve(&y).map(|z| -eps * z).unwrap_or_else(|_| y.clone() * 0.0);
                    (t * t * yy - 1.0, 2.0 * t * yy + 2.0 * t * t * y.dot(&dy))
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    (f64::NAN, f64::NAN)
                }
            },
            hi,
            tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let tau = tau?;
        let (_, y) = solve_at(tau.root)?;
        Ok((x - self.a.transpose() * y, Some(tau)))
    }

    /// The `eps = 0` projection `x - A^T (A A^T)^{-1} (A x - b)` through the
    /// cached Cholesky factor of `A A^T`.
    pub fn project_eps_zero(&self, x: &DenseVector) -> Result<DenseVector> {
        if self.eps != 0.0 {
            return Err(Error::Config(format!("project_eps_zero called with eps = {}", self.eps)));
        }
        let factor = self
            .gram_factor
            .as_ref()
            .ok_or_else(|| Error::Config("missing cached factorization of A A^T".into()))?;
        self.check_len(x)?;
        let y = factor.solve(&self.residual(x))?;
        Ok(x - self.a.transpose() * y)
    }
}
