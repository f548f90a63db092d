//! The `inf { t : F(t) >= level }` quantile of an empirical distribution.
//!
//! Both the resampled cutoff and the Gaussian oracle cutoff go through
//! [`upper_quantile`], so they agree on every shared input.

use num_traits::Float;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Smallest element `t` of `sorted` with `F(t) >= 1 - alpha`, where `F` is the
/// empirical CDF; equivalently `sorted[ceil((1 - alpha) * len) - 1]`.
///
/// `sorted` must be ascending.
pub fn upper_quantile<T: Scalar>(sorted: &[T], alpha: f64) -> Result<T> {
    if sorted.is_empty() {
        return Err(invalid("quantile of an empty sample"));
    }
    Ok(sorted[quantile_rank(sorted.len(), alpha)? - 1])
}

/// 1-based rank `k` minimising `k` subject to `k / len >= 1 - alpha`, i.e.
/// `ceil((1 - alpha) * len)`, evaluated exactly on the binary value of `alpha`.
pub fn quantile_rank(len: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if len == 0 {
        return Err(invalid("quantile of an empty sample"));
    }
    // ceil(len - alpha * len) = len - floor(alpha * len), with alpha = mantissa * 2^exponent
    let (mantissa, exponent, _) = alpha.integer_decode();
    let shift = u32::try_from(-i32::from(exponent)).expect("alpha < 1 has a negative exponent");
    let product = u128::from(mantissa) * len as u128;
    let floor = product.checked_shr(shift).unwrap_or(0) as usize;
    Ok(len - floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(upper_quantile(&s, 0.25).unwrap(), 3.0);
        assert_eq!(upper_quantile(&s, 1e-9).unwrap(), 4.0);
        assert_eq!(upper_quantile(&s, 0.75).unwrap(), 1.0);
        assert_eq!(upper_quantile(&s, 0.5).unwrap(), 2.0);
        assert_eq!(upper_quantile(&[2.5f32; 7], 0.3).unwrap(), 2.5);
        assert!(upper_quantile(&s, 0.0).is_err());
        assert!(upper_quantile(&s, 1.0).is_err());
        assert!(upper_quantile::<f64>(&[], 0.1).is_err());
    }

    /// Whether `k / len >= 1 - alpha` holds exactly for the binary `alpha`.
    fn reaches(k: usize, len: usize, alpha: f64) -> bool {
        let (m, e, _) = alpha.integer_decode();
        let s = -e as u32;
        assert!(s < 100);
        (k as u128) << s >= ((1u128 << s) - m as u128) * len as u128
    }

    #[test]
    fn rank_matches_inf_definition() {
        for len in 1..200usize {
            for a in 1..100 {
                let alpha = a as f64 / 100.0;
                let k = quantile_rank(len, alpha).unwrap();
                assert!(reaches(k, len, alpha), "len {len} alpha {alpha}");
                assert!(
                    k == 1 || !reaches(k - 1, len, alpha),
                    "len {len} alpha {alpha}"
                );
            }
        }
        assert_eq!(quantile_rank(1000, 0.1).unwrap(), 900);
        assert_eq!(quantile_rank(1000, 0.05).unwrap(), 950);
        // 0.99 is stored slightly below 0.99, so 1 - alpha exceeds 1/100
        assert_eq!(quantile_rank(100, 0.99).unwrap(), 2);
        assert_eq!(quantile_rank(7, 1e-300).unwrap(), 7);
    }
}
