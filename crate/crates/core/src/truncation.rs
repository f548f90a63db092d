//! Element-wise truncation, the truncated sample mean, and the rule that
//! picks the truncation level from a moment bound.

use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Default multiplier on the power-law truncation rule.
pub const DEFAULT_SELECTION_CONSTANT: f64 = 1.0;
/// Default moment excess: the rule then uses third absolute moments.
pub const DEFAULT_THETA: f64 = 1.0;

/// Truncation level together with the moment information it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec<T> {
    pub kappa: T,
    /// Moment order is `2 + theta`, with `0 < theta <= 1`.
    pub theta: T,
    /// Estimate of `max_j E|X_ij|^(2+theta)`.
    pub moment_bound: T,
    pub selection_constant: T,
}

impl<T: Scalar> TruncationSpec<T> {
    pub fn new(kappa: T, theta: T, moment_bound: T, selection_constant: T) -> Result<Self> {
        let spec = Self {
            kappa,
            theta,
            moment_bound,
            selection_constant,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Estimates the moment bound from `data` and applies [`select_kappa`].
    pub fn from_data(data: &DataMatrix<T>, theta: T, selection_constant: T) -> Result<Self> {
        let moment_bound = estimate_moment_bound(data, theta)?;
        let kappa = select_kappa(data.n(), data.p(), theta, moment_bound, selection_constant)?;
        Self::new(kappa, theta, moment_bound, selection_constant)
    }

    /// Uses a caller-supplied truncation level; the moment bound is still
    /// estimated so it can be reported.
    pub fn with_kappa(data: &DataMatrix<T>, kappa: T, theta: T) -> Result<Self> {
        let moment_bound = estimate_moment_bound(data, theta)?;
        Self::new(
            kappa,
            theta,
            moment_bound,
            T::of(DEFAULT_SELECTION_CONSTANT),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > T::zero() && self.kappa.is_finite()) {
            return Err(invalid(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        check_theta(self.theta)?;
        if !(self.moment_bound > T::zero() && self.moment_bound.is_finite()) {
            return Err(invalid(format!(
                "moment bound must be positive, got {}",
                self.moment_bound
            )));
        }
        if !(self.selection_constant > T::zero() && self.selection_constant.is_finite()) {
            return Err(invalid(format!(
                "selection constant must be positive, got {}",
                self.selection_constant
            )));
        }
        Ok(())
    }
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if theta > T::zero() && theta <= T::one() {
        Ok(())
    } else {
        Err(invalid(format!("theta must lie in (0, 1], got {theta}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    TruncatedMean,
    PlainMean,
    HuberRoot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate<T> {
    pub vector: Vec<T>,
    pub kind: EstimateKind,
}

/// Clamps `x` to `[-kappa, kappa]`.
pub fn truncate_scalar<T: Scalar>(x: T, kappa: T) -> Result<T> {
    if kappa > T::zero() {
        Ok(clamp(x, kappa))
    } else {
        Err(invalid(format!("kappa must be positive, got {kappa}")))
    }
}

/// Unchecked clamp used on hot paths once `kappa > 0` is established.
#[inline]
pub(crate) fn clamp<T: Scalar>(x: T, kappa: T) -> T {
    if x > kappa {
        kappa
    } else if x < -kappa {
        -kappa
    } else {
        x
    }
}

/// Column-wise average of the truncated observations.
pub fn truncated_mean<T: Scalar>(
    data: &DataMatrix<T>,
    spec: &TruncationSpec<T>,
) -> Result<MeanEstimate<T>> {
    spec.validate()?;
    let kappa = spec.kappa;
    let mut acc = vec![T::zero(); data.p()];
    for row in data.rows() {
        for (a, &x) in acc.iter_mut().zip(row) {
            *a = *a + clamp(x, kappa);
        }
    }
    let n = T::of_usize(data.n());
    Ok(MeanEstimate {
        // clamp again: summation rounding can push |a / n| an ulp past kappa
        vector: acc.into_iter().map(|a| clamp(a / n, kappa)).collect(),
        kind: EstimateKind::TruncatedMean,
    })
}

pub fn plain_mean<T: Scalar>(data: &DataMatrix<T>) -> MeanEstimate<T> {
    MeanEstimate {
        vector: data.column_means(),
        kind: EstimateKind::PlainMean,
    }
}

pub(crate) fn median<T: Scalar>(values: &mut [T]) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite data"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / T::of(2.0)
    }
}

/// Largest per-column empirical `(2 + theta)`-th absolute moment about the
/// column median.
pub fn estimate_moment_bound<T: Scalar>(data: &DataMatrix<T>, theta: T) -> Result<T> {
    check_theta(theta)?;
    let order = T::of(2.0) + theta;
    let integer_order = (order.fract() == T::zero())
        .then(|| order.to_i32())
        .flatten();
    let power = |d: T| match integer_order {
        Some(k) => d.powi(k),
        None => d.powf(order),
    };
    let n = T::of_usize(data.n());
    let mut best = T::zero();
    for j in 0..data.p() {
        let mut col = data.column(j);
        let center = median(&mut col);
        let moment = col
            .iter()
            .fold(T::zero(), |acc, &x| acc + power((x - center).abs()))
            / n;
        if moment > best {
            best = moment;
        }
    }
    Ok(best)
}

/// `constant * (n * moment_bound / ln p)^(1 / (2 + theta))`.
///
/// For `p = 1` the logarithm is replaced by `ln 2`.
pub fn select_kappa<T: Scalar>(
    n: usize,
    p: usize,
    theta: T,
    moment_bound: T,
    constant: T,
) -> Result<T> {
    check_theta(theta)?;
    if n < 2 {
        return Err(invalid(format!("need n >= 2, got {n}")));
    }
    if p < 1 {
        return Err(invalid("need p >= 1"));
    }
    if !(moment_bound > T::zero() && moment_bound.is_finite()) {
        return Err(invalid(format!(
            "moment bound must be positive, got {moment_bound}"
        )));
    }
    if !(constant > T::zero() && constant.is_finite()) {
        return Err(invalid(format!(
            "selection constant must be positive, got {constant}"
        )));
    }
    let log_p = T::of_usize(p.max(2)).ln();
    let base = T::of_usize(n) * moment_bound / log_p;
    Ok(constant * base.powf(T::one() / (T::of(2.0) + theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clamp_examples() {
        assert_eq!(truncate_scalar(3.0, 2.0).unwrap(), 2.0);
        assert_eq!(truncate_scalar(-5.0, 2.0).unwrap(), -2.0);
        assert_eq!(truncate_scalar(1.0, 2.0).unwrap(), 1.0);
        assert!(truncate_scalar(1.0, 0.0).is_err());
        assert!(truncate_scalar(1.0f32, -1.0).is_err());
    }

    #[test]
    fn truncated_mean_by_hand() {
        let x = DataMatrix::from_rows(&[[2.0f64, 0.5], [-0.3, -4.0]]).unwrap();
        let spec = TruncationSpec::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let est = truncated_mean(&x, &spec).unwrap();
        assert_eq!(est.kind, EstimateKind::TruncatedMean);
        assert!((est.vector[0] - 0.35).abs() < 1e-15);
        assert!((est.vector[1] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn inactive_truncation_gives_plain_mean() {
        let x = DataMatrix::from_rows(&[[2.0, 0.5], [-0.3, -4.0], [1.5, 3.25]]).unwrap();
        let spec = TruncationSpec::new(4.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(
            truncated_mean(&x, &spec).unwrap().vector,
            plain_mean(&x).vector
        );
    }

    #[test]
    fn constant_data() {
        let x = DataMatrix::new(5, 3, vec![-0.75f32; 15]).unwrap();
        let spec = TruncationSpec::new(1.0f32, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(truncated_mean(&x, &spec).unwrap().vector, vec![-0.75f32; 3]);
    }

    #[test]
    fn moment_bound_examples() {
        let zeros = DataMatrix::new(4, 2, vec![0.0; 8]).unwrap();
        assert_eq!(estimate_moment_bound(&zeros, 1.0).unwrap(), 0.0);
        let pm = DataMatrix::from_column(&[-1.0, 1.0]).unwrap();
        assert_eq!(estimate_moment_bound(&pm, 1.0).unwrap(), 1.0);
        assert!(estimate_moment_bound(&pm, 0.0).is_err());
        assert!(estimate_moment_bound(&pm, 1.5).is_err());
        // max over columns, centred at the median (2 here)
        let x = DataMatrix::from_rows(&[[0.0f64, 1.0], [2.0, 1.0], [5.0, 1.0]]).unwrap();
        assert!((estimate_moment_bound(&x, 1.0).unwrap() - 35.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn select_kappa_examples() {
        let k = select_kappa(1000, 100, 1.0, 1.0, 1.0).unwrap();
        assert!((k - (1000.0f64 / 100f64.ln()).cbrt()).abs() < 1e-12);
        assert!((k - 6.011).abs() < 1e-3);
        let k2 = select_kappa(1000, 100, 1.0, 1.0, 2.0).unwrap();
        assert!((k2 - 2.0 * k).abs() < 1e-12);
        let k8 = select_kappa(8000, 100, 1.0, 1.0, 1.0).unwrap();
        assert!((k8 - 2.0 * k).abs() < 1e-12);
        let theta = 0.5f64;
        let base = select_kappa(1000, 100, theta, 1.0, 1.0).unwrap();
        let scaled =
            select_kappa((1000.0 * 2f64.powf(2.5)) as usize, 100, theta, 1.0, 1.0).unwrap();
        assert!((scaled / base - 2.0).abs() < 1e-3);
        // p = 1 uses ln 2
        assert_eq!(
            select_kappa(100, 1, 1.0, 2.0, 1.0).unwrap(),
            select_kappa(100, 2, 1.0, 2.0, 1.0).unwrap()
        );
        assert!(select_kappa(100, 10, 1.0, 0.0, 1.0).is_err());
        assert!(select_kappa(100, 10, 1.0, 1.0, 0.0).is_err());
        assert!(select_kappa(1, 10, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(TruncationSpec::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(TruncationSpec::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(TruncationSpec::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(TruncationSpec::new(1.0, 1.0, 1.0, -1.0).is_err());
        let x = DataMatrix::from_column(&[-1.0f64, 1.0, 3.0]).unwrap();
        let spec = TruncationSpec::from_data(&x, 1.0, 1.0).unwrap();
        // median 1, |deviations|^3 = 8, 0, 8
        assert!((spec.moment_bound - 16.0 / 3.0).abs() < 1e-12);
        let m = (16.0f64 / 2f64.ln()).cbrt();
        assert!((spec.kappa - m).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn odd_idempotent_lipschitz(x in -1e6f64..1e6, y in -1e6f64..1e6, k in 1e-3f64..1e3) {
            let t = |v| truncate_scalar(v, k).unwrap();
            prop_assert_eq!(t(-x), -t(x));
            prop_assert_eq!(t(t(x)), t(x));
            prop_assert!((t(x) - t(y)).abs() <= (x - y).abs());
            prop_assert!(t(x).abs() <= k);
        }

        #[test]
        fn monotone_in_kappa(x in -1e6f64..1e6, k1 in 1e-3f64..1e3, k2 in 1e-3f64..1e3) {
            let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
            prop_assert!(truncate_scalar(x, lo).unwrap().abs() <= truncate_scalar(x, hi).unwrap().abs());
        }

        #[test]
        fn truncated_mean_bounded(values in proptest::collection::vec(-100f64..100.0, 6..60), k in 0.01f64..50.0) {
            let n = values.len() / 3;
            let x = DataMatrix::new(n, 3, values[..n * 3].to_vec()).unwrap();
            let spec = TruncationSpec::new(k, 1.0, 1.0, 1.0).unwrap();
            for v in truncated_mean(&x, &spec).unwrap().vector {
                prop_assert!(v.abs() <= k);
            }
        }

        #[test]
        fn select_kappa_monotone(n in 2usize..100_000, p in 3usize..10_000, m in 0.01f64..100.0) {
            let k = |n, p, m| select_kappa(n, p, 1.0, m, 1.0).unwrap();
            prop_assert!(k(n + 1, p, m) > k(n, p, m));
            prop_assert!(k(n, p, m * 1.5) > k(n, p, m));
            prop_assert!(k(n, p + 1, m) < k(n, p, m));
        }
    }
}
