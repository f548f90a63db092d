//! Known-covariance Gaussian reference: Monte Carlo draws of `|Y|_inf` for
//! `Y ~ N(0, Sigma)` and the oracle cutoff taken from them.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantile::upper_quantile;
use crate::scalar::Scalar;
use crate::seed::{stream_rng, DOMAIN_GAUSSIAN};

/// Draws per independently seeded block.
const BLOCK: usize = 4096;
/// Relative tolerance (against `max |Sigma_ij|`) for symmetry and PSD checks.
const PSD_TOLERANCE: f64 = 1e-8;

/// Covariance structure; combined with a dimension in [`CovarianceModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    Identity,
    /// Unit variances, all correlations equal to `rho`.
    Equicorrelated {
        rho: f64,
    },
    /// Unit variances, `corr(Y_j, Y_k) = rho^|j-k|`.
    Ar1 {
        rho: f64,
    },
    Explicit {
        matrix: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone)]
enum Factor {
    Identity,
    Equicorrelated {
        shared: f64,
        own: f64,
    },
    Ar1 {
        rho: f64,
        innovation: f64,
    },
    /// Columns of a square-root factor, one per retained pivot.
    Dense {
        columns: Vec<Vec<f64>>,
    },
}

/// Validated covariance of dimension `p` with a square-root factor ready for
/// sampling. Semidefinite inputs are accepted and factored with pivoting.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    kind: CovarianceKind,
    p: usize,
    factor: Factor,
}

impl CovarianceModel {
    pub fn new(kind: CovarianceKind, p: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidCovariance(
                "dimension must be at least 1".into(),
            ));
        }
        let factor = match &kind {
            CovarianceKind::Identity => Factor::Identity,
            CovarianceKind::Equicorrelated { rho } => {
                let rho = *rho;
                let floor = if p > 1 { -1.0 / (p - 1) as f64 } else { -1.0 };
                if !(rho.is_finite() && rho <= 1.0 && rho >= floor - PSD_TOLERANCE) {
                    return Err(Error::InvalidCovariance(format!(
                        "equicorrelation {rho} outside [{floor}, 1] for p = {p}"
                    )));
                }
                if rho >= 0.0 {
                    Factor::Equicorrelated {
                        shared: rho.sqrt(),
                        own: (1.0 - rho).sqrt(),
                    }
                } else {
                    Factor::Dense {
                        columns: pivoted_cholesky(&dense(&kind, p))?,
                    }
                }
            }
            CovarianceKind::Ar1 { rho } => {
                let rho = *rho;
                if !(rho.is_finite() && rho.abs() <= 1.0) {
                    return Err(Error::InvalidCovariance(format!(
                        "AR(1) coefficient {rho} outside [-1, 1]"
                    )));
                }
                Factor::Ar1 {
                    rho,
                    innovation: (1.0 - rho * rho).max(0.0).sqrt(),
                }
            }
            CovarianceKind::Explicit { matrix } => {
                if matrix.len() != p || matrix.iter().any(|r| r.len() != p) {
                    return Err(Error::InvalidCovariance(format!(
                        "explicit matrix must be {p}x{p}"
                    )));
                }
                if matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidCovariance("non-finite entry".into()));
                }
                if let Some(j) = (0..p).find(|&j| matrix[j][j] <= 0.0) {
                    return Err(Error::InvalidCovariance(format!(
                        "diagonal entry {j} is not positive"
                    )));
                }
                Factor::Dense {
                    columns: pivoted_cholesky(matrix)?,
                }
            }
        };
        Ok(Self { kind, p, factor })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            kind: CovarianceKind::Identity,
            p,
            factor: Factor::Identity,
        }
    }

    pub fn kind(&self) -> &CovarianceKind {
        &self.kind
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        dense(&self.kind, self.p)
    }

    /// Fills `out` (length `p`) with one draw of `N(0, Sigma)`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.p);
        match &self.factor {
            Factor::Identity => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            Factor::Equicorrelated { shared, own } => {
                let common: f64 = rng.sample(StandardNormal);
                for v in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = shared * common + own * z;
                }
            }
            Factor::Ar1 { rho, innovation } => {
                let mut prev: f64 = rng.sample(StandardNormal);
                out[0] = prev;
                for v in out.iter_mut().skip(1) {
                    let z: f64 = rng.sample(StandardNormal);
                    prev = rho * prev + innovation * z;
                    *v = prev;
                }
            }
            Factor::Dense { columns } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for col in columns {
                    let z: f64 = rng.sample(StandardNormal);
                    for (v, c) in out.iter_mut().zip(col) {
                        *v += c * z;
                    }
                }
            }
        }
    }
}

fn dense(kind: &CovarianceKind, p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|j| {
            (0..p)
                .map(|k| match kind {
                    CovarianceKind::Identity => f64::from(u8::from(j == k)),
                    CovarianceKind::Equicorrelated { rho } => {
                        if j == k {
                            1.0
                        } else {
                            *rho
                        }
                    }
                    CovarianceKind::Ar1 { rho } => rho.powi(j.abs_diff(k) as i32),
                    CovarianceKind::Explicit { matrix } => matrix[j][k],
                })
                .collect()
        })
        .collect()
}

/// Outer-product Cholesky with diagonal pivoting.
///
/// Returns columns `c_1..c_r` (in original coordinate order) with
/// `Sigma = sum_k c_k c_k^T`, stopping once the remaining Schur complement is
/// numerically zero. A Schur complement that is not, or a materially
/// asymmetric input, means the matrix is not PSD.
pub(crate) fn pivoted_cholesky(sigma: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let p = sigma.len();
    let scale = sigma
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = PSD_TOLERANCE * scale;
    for (j, row) in sigma.iter().enumerate() {
        for (k, &v) in row.iter().enumerate().take(j) {
            if (v - sigma[k][j]).abs() > tol {
                return Err(Error::InvalidCovariance(format!(
                    "matrix is not symmetric at ({j}, {k})"
                )));
            }
        }
    }
    let mut schur: Vec<Vec<f64>> = sigma.to_vec();
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut columns = Vec::new();
    while !remaining.is_empty() {
        let (pos, &pivot) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| schur[*a.1][*a.1].total_cmp(&schur[*b.1][*b.1]))
            .expect("nonempty");
        let d = schur[pivot][pivot];
        if d <= tol {
            break;
        }
        let root = d.sqrt();
        let mut col = vec![0.0; p];
        for &i in &remaining {
            col[i] = schur[i][pivot] / root;
        }
        remaining.swap_remove(pos);
        for &i in &remaining {
            for &l in &remaining {
                schur[i][l] -= col[i] * col[l];
            }
        }
        columns.push(col);
    }
    for &i in &remaining {
        for &l in &remaining {
            if schur[i][l].abs() > tol {
                return Err(Error::InvalidCovariance(format!(
                    "matrix is not positive semidefinite (residual {} at ({i}, {l}))",
                    schur[i][l]
                )));
            }
        }
    }
    Ok(columns)
}

/// `draws` independent realisations of `|Y|_inf`, sorted ascending.
///
/// Draws are produced in fixed blocks, each with its own generator derived
/// from `seed`, so the result is identical for any thread count.
pub fn sample_gaussian_max<T: Scalar>(
    cov: &CovarianceModel,
    draws: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if draws < 1 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let blocks = draws.div_ceil(BLOCK);
    let mut out: Vec<T> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let len = BLOCK.min(draws - b * BLOCK);
            let mut rng = stream_rng(seed, DOMAIN_GAUSSIAN, b as u64);
            let mut y = vec![0.0; cov.p()];
            (0..len)
                .map(|_| {
                    cov.sample_into(&mut rng, &mut y);
                    T::of(y.iter().fold(0.0f64, |m, v| m.max(v.abs())))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    Ok(out)
}

/// `c_{1-alpha} = inf { t : P(|Y|_inf <= t) >= 1 - alpha }` from sorted draws.
pub fn oracle_cutoff<T: Scalar>(samples: &[T], alpha: f64) -> Result<T> {
    upper_quantile(samples, alpha)
}
