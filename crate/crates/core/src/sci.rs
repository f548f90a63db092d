//! Simultaneous confidence box, the dual sup-norm test and the Huber point
//! estimate, all read off the per-coordinate score
//! `f_j(y) = sum_i t_kappa(X_ij - y)`.
//!
//! `f_j` is continuous, nonincreasing and piecewise linear with knots at
//! `X_ij +/- kappa`; between knots its slope is minus the number of
//! observations within `kappa` of `y`. Level sets are therefore found exactly
//! by locating the bracketing knots and solving one linear equation.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::truncation::{clamp, EstimateKind, MeanEstimate, TruncationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `inf { y : f(y) <= level }`
    Smallest,
    /// `sup { y : f(y) >= level }`
    Largest,
}

/// Per-coordinate intervals `[lower_j, upper_j]` whose product is the
/// confidence region `{ nu : |sum_i t_kappa(X_i - nu)|_inf <= sqrt(n) * cutoff }`.
#[derive(Debug, Clone, PartialEq)]
pub struct SciResult<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub cutoff: T,
    pub alpha: f64,
    pub kappa: T,
}

impl<T: Scalar> SciResult<T> {
    /// Closed-box membership.
    pub fn contains(&self, nu: &[T]) -> bool {
        nu.len() == self.lower.len()
            && nu
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| l <= v && v <= u)
    }

    pub fn widths(&self) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| u - l)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestDecision<T> {
    /// `|sum_i t_kappa(X_i - mu0)|_inf`
    pub statistic: T,
    /// `sqrt(n) * cutoff`
    pub threshold: T,
    pub reject: bool,
}

/// `sum_i t_kappa(x_i - y)`, summed in index order.
pub fn score_function<T: Scalar>(column: &[T], kappa: T, y: T) -> Result<T> {
    if !(kappa > T::zero()) {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    Ok(score(column, kappa, y))
}

#[inline]
fn score<T: Scalar>(column: &[T], kappa: T, y: T) -> T {
    column
        .iter()
        .fold(T::zero(), |acc, &x| acc + clamp(x - y, kappa))
}

/// Number of observations whose linear piece `x - y` is active on the whole
/// segment `[a, b]`.
fn active_count<T: Scalar>(column: &[T], kappa: T, a: T, b: T) -> usize {
    column
        .iter()
        .filter(|&&x| x - kappa <= a && b <= x + kappa)
        .count()
}

/// Exact endpoint of the level set of the score for one coordinate.
///
/// Requires `|level| < n * kappa`; otherwise the solution set is unbounded.
pub fn solve_level<T: Scalar>(column: &[T], kappa: T, level: T, side: Side) -> Result<T> {
    if !(kappa > T::zero()) {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    if column.is_empty() {
        return Err(invalid("empty column"));
    }
    let bound = T::of_usize(column.len()) * kappa;
    if !(level.abs() < bound) {
        return Err(Error::NoSolution {
            level: level.as_f64(),
            bound: bound.as_f64(),
        });
    }
    let mut knots: Vec<T> = column
        .iter()
        .flat_map(|&x| [x - kappa, x + kappa])
        .collect();
    knots.sort_by(|a, b| a.partial_cmp(b).expect("finite data"));
    // The outermost knots score +/- n*kappa up to rounding, so the bracketing
    // index is interior except when |level| sits within an ulp of n*kappa.
    let t = match side {
        Side::Smallest => knots.partition_point(|&k| score(column, kappa, k) > level),
        Side::Largest => knots.partition_point(|&k| score(column, kappa, k) >= level),
    }
    .clamp(1, knots.len() - 1);
    let (a, b) = (knots[t - 1], knots[t]);
    let fa = score(column, kappa, a);
    let slope = active_count(column, kappa, a, b);
    if slope == 0 {
        return Ok(a);
    }
    let y = a + (fa - level) / T::of_usize(slope);
    Ok(snap(column, kappa, level, side, y.max(a).min(b), a, b))
}

/// If the rounded score at `y` misses the side's inequality, bisects in floats
/// towards the bracketing knot that meets it, so an endpoint of the box is
/// never rejected by `test_mean` for rounding reasons alone.
fn snap<T: Scalar>(column: &[T], kappa: T, level: T, side: Side, y: T, a: T, b: T) -> T {
    let (inside, knot): (fn(T, T) -> bool, T) = match side {
        Side::Smallest => (|f, l| f <= l, b),
        Side::Largest => (|f, l| f >= l, a),
    };
    let meets = |v: T| inside(score(column, kappa, v), level);
    if meets(y) || !meets(knot) {
        return y;
    }
    let (mut outside, mut within) = (y, knot);
    loop {
        let mid = outside + (within - outside) / T::of(2.0);
        if mid == outside || mid == within {
            return within;
        }
        if meets(mid) {
            within = mid;
        } else {
            outside = mid;
        }
    }
}

/// Closed form `[inf, sup]` of the zero set of one coordinate's score.
fn zero_set<T: Scalar>(column: &[T], kappa: T) -> Result<(T, T)> {
    Ok((
        solve_level(column, kappa, T::zero(), Side::Smallest)?,
        solve_level(column, kappa, T::zero(), Side::Largest)?,
    ))
}

/// Simultaneous intervals for every coordinate at the given cutoff.
///
/// The cutoff is either the Gaussian oracle `c_{1-alpha}` or the resampled
/// `q_hat_{1-alpha}`; `alpha` is recorded for reporting only.
pub fn build_sci<T: Scalar>(
    data: &DataMatrix<T>,
    spec: &TruncationSpec<T>,
    cutoff: T,
    alpha: f64,
) -> Result<SciResult<T>> {
    spec.validate()?;
    if !(cutoff >= T::zero() && cutoff.is_finite()) {
        return Err(invalid(format!("cutoff must be nonnegative, got {cutoff}")));
    }
    let n = data.n();
    let kappa = spec.kappa;
    let level = T::of_usize(n).sqrt() * cutoff;
    if !(T::of_usize(n) * kappa > level) {
        return Err(Error::InfeasibleCutoff {
            kappa: kappa.as_f64(),
            cutoff: cutoff.as_f64(),
            n,
        });
    }
    let bounds: Vec<(T, T)> = (0..data.p())
        .into_par_iter()
        .map(|j| {
            let col = data.column(j);
            Ok((
                solve_level(&col, kappa, level, Side::Smallest)?,
                solve_level(&col, kappa, -level, Side::Largest)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (lower, upper) = bounds.into_iter().unzip();
    Ok(SciResult {
        lower,
        upper,
        cutoff,
        alpha,
        kappa,
    })
}

/// Midpoint of each coordinate's zero set of the score.
pub fn huber_estimate<T: Scalar>(
    data: &DataMatrix<T>,
    spec: &TruncationSpec<T>,
) -> Result<MeanEstimate<T>> {
    spec.validate()?;
    let vector = (0..data.p())
        .into_par_iter()
        .map(|j| {
            let (lo, hi) = zero_set(&data.column(j), spec.kappa)?;
            Ok(lo + (hi - lo) / T::of(2.0))
        })
        .collect::<Result<_>>()?;
    Ok(MeanEstimate {
        vector,
        kind: EstimateKind::HuberRoot,
    })
}

/// Sup-norm test of `H0: mu = mu0`; rejects when the statistic reaches
/// `sqrt(n) * cutoff`.
pub fn test_mean<T: Scalar>(
    data: &DataMatrix<T>,
    spec: &TruncationSpec<T>,
    mu0: &[T],
    cutoff: T,
) -> Result<TestDecision<T>> {
    spec.validate()?;
    if mu0.len() != data.p() {
        return Err(invalid(format!(
            "mu0 has length {}, data has {} coordinates",
            mu0.len(),
            data.p()
        )));
    }
    if !(cutoff >= T::zero() && cutoff.is_finite()) {
        return Err(invalid(format!("cutoff must be nonnegative, got {cutoff}")));
    }
    let kappa = spec.kappa;
    let mut sums = vec![T::zero(); data.p()];
    for row in data.rows() {
        for ((s, &x), &m) in sums.iter_mut().zip(row).zip(mu0) {
            *s = *s + clamp(x - m, kappa);
        }
    }
    let statistic = sums.iter().fold(T::zero(), |best, s| best.max(s.abs()));
    let threshold = T::of_usize(data.n()).sqrt() * cutoff;
    Ok(TestDecision {
        statistic,
        threshold,
        reject: statistic >= threshold,
    })
}
