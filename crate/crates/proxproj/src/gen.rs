//! Seeded instance generators.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)`. Uniforms are
//! `rng.random::<f64>()` (53-bit, in `[0, 1)`); standard normals use the
//! Box-Muller cosine branch `sqrt(-2 ln(1 - u1)) cos(2 pi u2)`, consuming two
//! uniforms per variate. Index sets are drawn with `rand::seq::index::sample`.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apps::bp::BpProblem;
use crate::apps::emd::EmdProblem;
use crate::apps::smc::SmcProblem;
use crate::apps::spcp::SpcpProblem;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::prox::{mask_project, ObservationMask};

/// Default EMD tolerance.
pub const EMD_EPS: f64 = 1e-10;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> DenseMatrix {
    // Row-major draw order, so the stream maps to the file layout.
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = std * normal(rng);
        }
    }
    m
}

/// Degrees of freedom `r (2n - r)` of an `n x n` rank-`r` matrix.
pub fn degrees_of_freedom(n: usize, r: usize) -> usize {
    r * (2 * n - r.min(2 * n))
}

#[derive(Debug, Clone)]
pub struct BpInstance {
    pub problem: BpProblem,
    pub x_star: DenseVector,
}

/// `A_ij ~ N(0, 1/m)`; `x*_i` is nonzero with probability `p_nonzero`, with
/// nonzeros `N(0, 1)`; `b = A x*`.
pub fn gen_bp(m: usize, n: usize, p_nonzero: f64, seed: u64) -> Result<BpInstance> {
    if m == 0 || m > n {
        return Err(Error::Config(format!("need 0 < m <= n, got m = {m}, n = {n}")));
    }
    if !(p_nonzero > 0.0 && p_nonzero <= 1.0) {
        return Err(Error::Config(format!("p_nonzero must lie in (0, 1], got {p_nonzero}")));
    }
    let mut r = rng(seed);
    let a = normal_matrix(&mut r, m, n, 1.0 / (m as f64).sqrt());
    let x_star = DenseVector::from_fn(n, |_, _| {
        let keep = r.random::<f64>() < p_nonzero;
        let v = normal(&mut r);
        if keep {
            v
        } else {
            0.0
        }
    });
    let b = &a * &x_star;
    Ok(BpInstance {
        problem: BpProblem::new(a, b)?,
        x_star,
    })
}

#[derive(Debug, Clone)]
pub struct SmcInstance {
    pub problem: SmcProblem,
    /// The planted low-rank matrix.
    pub m: DenseMatrix,
    /// Noise on the observed entries (zero elsewhere).
    pub noise: DenseMatrix,
}

/// Default SMC noise level: `1e-3 sqrt(r)`, which makes
/// `eps / ||P_Omega(M)||_F` about `1e-3` for standard normal factors.
pub fn default_smc_noise(r: usize) -> f64 {
    1e-3 * (r.max(1) as f64).sqrt()
}

/// `M = M_L M_R^T` with standard normal `n x r` factors, `Omega` uniform of
/// size `s = round(oversample d_r)`, observations `M + N` on `Omega` with
/// `N_ij ~ N(0, sigma^2)`, and `eps = ||P_Omega(N)||_F`. The residual scale
/// of the problem is `||M||_F`.
pub fn gen_smc(n: usize, r: usize, oversample: f64, noise_sigma: Option<f64>, seed: u64) -> Result<SmcInstance> {
    if n == 0 || r == 0 || r > n {
        return Err(Error::Config(format!("need 0 < r <= n, got r = {r}, n = {n}")));
    }
    if !(oversample > 0.0 && oversample.is_finite()) {
        return Err(Error::Config(format!("oversample must be positive, got {oversample}")));
    }
    let s = (oversample * degrees_of_freedom(n, r) as f64).round() as usize;
    if s > n * n {
        return Err(Error::Config(format!("{s} samples requested from a {n}x{n} matrix")));
    }
    let sigma = noise_sigma.unwrap_or_else(|| default_smc_noise(r));
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("noise sigma must be nonnegative, got {sigma}")));
    }
    let mut g = rng(seed);
    let ml = normal_matrix(&mut g, n, r, 1.0);
    let mr = normal_matrix(&mut g, n, r, 1.0);
    let m = &ml * mr.transpose();
    let idx: Vec<(usize, usize)> = sample(&mut g, n * n, s).into_iter().map(|t| (t / n, t % n)).collect();
    let omega = ObservationMask::new(n, n, idx)?;
    let mut noise = DenseMatrix::zeros(n, n);
    for &(i, j) in omega.indices() {
        noise[(i, j)] = sigma * normal(&mut g);
    }
    let eps = noise.norm();
    let observed = mask_project(&(&m + &noise), &omega)?;
    let scale = m.norm();
    Ok(SmcInstance {
        problem: SmcProblem::new(observed, omega, eps, Some(scale))?,
        m,
        noise,
    })
}

#[derive(Debug, Clone)]
pub struct SpcpInstance {
    pub problem: SpcpProblem,
    pub l_star: DenseMatrix,
    pub s_star: DenseMatrix,
    pub noise: DenseMatrix,
}

/// Magnitude bound of the planted sparse entries.
pub const SPCP_SPARSE_AMPLITUDE: f64 = 10.0;

/// `L* = U V^T` with standard normal `n1 x r` and `n2 x r` factors; each
/// entry of `S*` is nonzero with probability `sparse_frac`, uniform on
/// `[-10, 10]`; `N_ij ~ N(0, sigma^2)`; `M = (L* + S*) + N`, `eps = ||N||_F`.
pub fn gen_spcp(
    n1: usize,
    n2: usize,
    r: usize,
    sparse_frac: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<SpcpInstance> {
    if n1 == 0 || n2 == 0 || r > n1.min(n2) {
        return Err(Error::Config(format!("need r <= min(n1, n2), got r = {r} for {n1}x{n2}")));
    }
    if !(0.0..=1.0).contains(&sparse_frac) {
        return Err(Error::Config(format!("sparse_frac must lie in [0, 1], got {sparse_frac}")));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::Config(format!("noise sigma must be nonnegative, got {noise_sigma}")));
    }
    let mut g = rng(seed);
    let u = normal_matrix(&mut g, n1, r, 1.0);
    let v = normal_matrix(&mut g, n2, r, 1.0);
    let l_star = &u * v.transpose();
    let mut s_star = DenseMatrix::zeros(n1, n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let hit = g.random::<f64>() < sparse_frac;
            let val = SPCP_SPARSE_AMPLITUDE * (2.0 * g.random::<f64>() - 1.0);
            if hit {
                s_star[(i, j)] = val;
            }
        }
    }
    let noise = normal_matrix(&mut g, n1, n2, noise_sigma);
    let m = (&l_star + &s_star) + &noise;
    let eps = noise.norm();
    Ok(SpcpInstance {
        problem: SpcpProblem::new(m, None, eps)?,
        l_star,
        s_star,
        noise,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmdKind {
    /// Unit masses at two grid cells.
    PointMasses { from: (usize, usize), to: (usize, usize) },
    /// Each density is a sum of `count` Gaussian bumps with random centers and widths.
    Blobs { count: usize },
    /// User-supplied nonnegative densities (e.g. loaded images).
    Loaded { rho0: DenseMatrix, rho1: DenseMatrix },
}

/// Builds an `n x n` EMD instance with unit-mass densities and `eps = 1e-10`.
pub fn gen_emd_pair(kind: &EmdKind, n: usize, seed: u64) -> Result<EmdProblem> {
    let (rho0, rho1) = match kind {
        EmdKind::PointMasses { from, to } => {
            if from.0 >= n || from.1 >= n || to.0 >= n || to.1 >= n {
                return Err(Error::Config(format!("point masses {from:?}, {to:?} outside a {n}x{n} grid")));
            }
            let mut a = DenseMatrix::zeros(n, n);
            let mut b = DenseMatrix::zeros(n, n);
            a[*from] = 1.0;
            b[*to] = 1.0;
            (a, b)
        }
        EmdKind::Blobs { count } => {
            if *count == 0 {
                return Err(Error::Degenerate("blob count must be positive".into()));
            }
            let mut g = rng(seed);
            (blobs(&mut g, n, *count), blobs(&mut g, n, *count))
        }
        EmdKind::Loaded { rho0, rho1 } => (rho0.clone(), rho1.clone()),
    };
    for (name, rho) in [("rho0", &rho0), ("rho1", &rho1)] {
        if rho.shape() != (n, n) {
            return Err(Error::Shape(format!("{name} is {:?}, expected ({n}, {n})", rho.shape())));
        }
        if rho.iter().all(|v| *v == 0.0) {
            return Err(Error::Degenerate(format!("{name} is identically zero")));
        }
    }
    EmdProblem::new(rho0, rho1, None, EMD_EPS)
}

fn blobs(g: &mut ChaCha8Rng, n: usize, count: usize) -> DenseMatrix {
    let mut rho = DenseMatrix::zeros(n, n);
    for _ in 0..count {
        let ci = g.random::<f64>() * (n - 1) as f64;
        let cj = g.random::<f64>() * (n - 1) as f64;
        let w = 0.5 + g.random::<f64>() * 0.15 * n as f64;
        for i in 0..n {
            for j in 0..n {
                let d2 = (i as f64 - ci).powi(2) + (j as f64 - cj).powi(2);
                rho[(i, j)] += (-d2 / (2.0 * w * w)).exp();
            }
        }
    }
    rho
}
