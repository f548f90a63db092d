//! Truncated half-sampling.
//!
//! A uniformly random permutation splits the sample into two halves of size
//! `m`; the scaled pairwise differences `(X_pi(i) - X_pi(m+i)) / sqrt(2)` are
//! mean-zero, symmetric, and share the covariance of the observations. The
//! truncated sup-norm statistic of their mean, over `J` independent
//! permutations, gives the empirical distribution whose upper quantile is the
//! data-driven cutoff for the confidence box.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::quantile::upper_quantile;
use crate::scalar::Scalar;
use crate::seed::{stream_rng, DOMAIN_DROP_ROW, DOMAIN_PERMUTATION};
use crate::truncation::{clamp, TruncationSpec};

/// Number of permutations, half-size and the seed that drives them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResamplePlan {
    pub permutations: usize,
    pub half: usize,
    pub seed: u64,
    /// Row left out when `n` is odd.
    pub dropped_row: Option<usize>,
}

impl ResamplePlan {
    /// Plan for a sample of `n` rows. For odd `n` one row, chosen uniformly
    /// from the seed, is set aside so the remaining `2m` rows split evenly.
    pub fn new(n: usize, permutations: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("half-sampling needs n >= 2, got {n}")));
        }
        if permutations < 1 {
            return Err(invalid("need at least one permutation"));
        }
        let dropped_row =
            (n % 2 == 1).then(|| stream_rng(seed, DOMAIN_DROP_ROW, 0).random_range(0..n));
        Ok(Self {
            permutations,
            half: n / 2,
            seed,
            dropped_row,
        })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.permutations < 1 {
            return Err(invalid("need at least one permutation"));
        }
        if self.half < 1 || 2 * self.half > n || n > 2 * self.half + 1 {
            return Err(invalid(format!(
                "half-size {} incompatible with n = {n}",
                self.half
            )));
        }
        match (n % 2 == 1, self.dropped_row) {
            (true, Some(r)) if r < n => Ok(()),
            (false, None) => Ok(()),
            _ => Err(invalid(format!(
                "dropped row {:?} inconsistent with n = {n}",
                self.dropped_row
            ))),
        }
    }

    /// Row indices taking part in the split, ascending.
    pub fn retained_rows(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| Some(i) != self.dropped_row).collect()
    }

    /// The `j`-th permutation of the retained rows (0-based), a seeded
    /// Fisher-Yates shuffle on its own stream.
    pub fn permutation(&self, n: usize, j: usize) -> Vec<usize> {
        let mut perm = self.retained_rows(n);
        perm.shuffle(&mut stream_rng(self.seed, DOMAIN_PERMUTATION, j as u64));
        perm
    }
}

/// Sorted resampled statistics `sqrt(m) * |mean_i t_kappa(Z_i)|_inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampleDistribution<T> {
    pub stats: Vec<T>,
    pub kappa_used: T,
    pub half: usize,
}

impl<T: Scalar> ResampleDistribution<T> {
    /// Empirical CDF `F_J(t)`.
    pub fn cdf(&self, t: T) -> f64 {
        let below = self.stats.partition_point(|&s| s <= t);
        below as f64 / self.stats.len() as f64
    }
}

fn check_permutation(perm: &[usize], plan: &ResamplePlan, n: usize) -> Result<()> {
    if perm.len() != 2 * plan.half {
        return Err(invalid(format!(
            "permutation has length {}, expected {}",
            perm.len(),
            2 * plan.half
        )));
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || Some(i) == plan.dropped_row || seen[i] {
            return Err(invalid(format!(
                "permutation is not a bijection on the retained rows (bad index {i})"
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

/// The `m x p` matrix of scaled half-sample differences for `permutation`.
///
/// With `n = 2` the result has a single row.
pub fn half_sample_diffs<T: Scalar>(
    data: &DataMatrix<T>,
    permutation: &[usize],
    plan: &ResamplePlan,
) -> Result<DataMatrix<T>> {
    plan.validate(data.n())?;
    check_permutation(permutation, plan, data.n())?;
    let scale = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let m = plan.half;
    let mut values = Vec::with_capacity(m * data.p());
    for i in 0..m {
        let a = data.row(permutation[i]);
        let b = data.row(permutation[m + i]);
        values.extend(a.iter().zip(b).map(|(&x, &y)| (x - y) * scale));
    }
    // m may be 1 here, below the observation-matrix minimum
    Ok(DataMatrix::derived(m, data.p(), values))
}

/// `sqrt(m) * |(1/m) sum_i t_kappa(Z_i)|_inf` for one permutation.
pub fn half_sample_statistic<T: Scalar>(
    data: &DataMatrix<T>,
    permutation: &[usize],
    plan: &ResamplePlan,
    kappa: T,
) -> Result<T> {
    plan.validate(data.n())?;
    check_permutation(permutation, plan, data.n())?;
    if !(kappa > T::zero()) {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    Ok(statistic_unchecked(
        data,
        permutation,
        plan.half,
        kappa,
        &mut vec![T::zero(); data.p()],
    ))
}

fn statistic_unchecked<T: Scalar>(
    data: &DataMatrix<T>,
    perm: &[usize],
    m: usize,
    kappa: T,
    acc: &mut [T],
) -> T {
    let scale = T::of(std::f64::consts::FRAC_1_SQRT_2);
    acc.iter_mut().for_each(|a| *a = T::zero());
    for i in 0..m {
        let a = data.row(perm[i]);
        let b = data.row(perm[m + i]);
        for ((s, &x), &y) in acc.iter_mut().zip(a).zip(b) {
            *s = *s + clamp((x - y) * scale, kappa);
        }
    }
    let max_abs = acc.iter().fold(T::zero(), |best, s| best.max(s.abs()));
    // sqrt(m) * max|sum| / m
    max_abs / T::of_usize(m).sqrt()
}

/// Draws `J` independent uniform permutations and collects the sorted
/// truncated half-sampling statistics.
///
/// Each permutation owns a generator derived from `(seed, j)` and the
/// per-coordinate sums run in fixed row order, so the output does not depend
/// on the rayon thread count.
pub fn resample_distribution<T: Scalar>(
    data: &DataMatrix<T>,
    spec: &TruncationSpec<T>,
    plan: &ResamplePlan,
) -> Result<ResampleDistribution<T>> {
    spec.validate()?;
    plan.validate(data.n())?;
    let n = data.n();
    let p = data.p();
    let m = plan.half;
    let kappa = spec.kappa;
    let mut stats: Vec<T> = (0..plan.permutations)
        .into_par_iter()
        .map_init(
            || vec![T::zero(); p],
            |acc, j| {
                let perm = plan.permutation(n, j);
                statistic_unchecked(data, &perm, m, kappa, acc)
            },
        )
        .collect();
    stats.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    Ok(ResampleDistribution {
        stats,
        kappa_used: kappa,
        half: m,
    })
}

/// `q_hat_{1-alpha} = inf { t : F_J(t) >= 1 - alpha }`.
pub fn empirical_quantile<T: Scalar>(dist: &ResampleDistribution<T>, alpha: f64) -> Result<T> {
    upper_quantile(&dist.stats, alpha)
}
