//! Rate diagnostics for the Gaussian approximation of the truncated mean.
//!
//! These evaluate the growth conditions and the final error-rate expression
//! with all unknown constants set to one. They are qualitative: a ratio well
//! below one says the sample is in the regime where the approximation is
//! expected to hold, not that a certified bound is met.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Ratios at or above this value are reported as non-vanishing.
pub const REGIME_RATIO_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryDiagnostics {
    /// `(ln p)^(4 + 3 theta) * M^2 / n^theta`
    pub condition_ratio_thm: f64,
    /// `1/n + 3 * condition_ratio_thm^(1 / (6 + 3 theta))`
    pub bound_proxy: f64,
    /// `p * (ln p)^(3q/2 - 1) / n^(q/2 - 1)`, the dimension condition for the
    /// untruncated mean with `q` finite moments.
    pub condition_ratio_prop: Option<f64>,
}

impl TheoryDiagnostics {
    /// Whether the truncated-mean growth condition looks satisfied.
    pub fn truncated_regime_ok(&self) -> bool {
        self.condition_ratio_thm < REGIME_RATIO_LIMIT
    }

    pub fn plain_regime_ok(&self) -> Option<bool> {
        self.condition_ratio_prop.map(|r| r < REGIME_RATIO_LIMIT)
    }
}

/// Empirical Kolmogorov distances next to the theory ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaDiagnostics {
    /// Distance between `sqrt(n) |mu_hat_kappa|_inf` and `|Y|_inf`.
    pub ks_distance: f64,
    /// Same for the untruncated sample mean.
    pub ks_distance_plain: f64,
    #[serde(flatten)]
    pub theory: TheoryDiagnostics,
}

pub fn theory_diagnostics(
    n: usize,
    p: usize,
    theta: f64,
    moment_bound: f64,
    q: Option<f64>,
) -> Result<TheoryDiagnostics> {
    if n < 2 || p < 2 {
        return Err(invalid(format!(
            "diagnostics need n >= 2 and p >= 2, got n = {n}, p = {p}"
        )));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1], got {theta}")));
    }
    if !(moment_bound >= 0.0 && moment_bound.is_finite()) {
        return Err(invalid(format!(
            "moment bound must be nonnegative, got {moment_bound}"
        )));
    }
    let (nf, pf) = (n as f64, p as f64);
    let log_p = pf.ln();
    let condition_ratio_thm = log_p.powf(4.0 + 3.0 * theta) * moment_bound.powi(2) / nf.powf(theta);
    let bound_proxy = 1.0 / nf + 3.0 * condition_ratio_thm.powf(1.0 / (6.0 + 3.0 * theta));
    let condition_ratio_prop = match q {
        Some(q) if q > 2.0 => Some(pf * log_p.powf(1.5 * q - 1.0) / nf.powf(q / 2.0 - 1.0)),
        Some(q) => return Err(invalid(format!("moment order q must exceed 2, got {q}"))),
        None => None,
    };
    Ok(TheoryDiagnostics {
        condition_ratio_thm,
        bound_proxy,
        condition_ratio_prop,
    })
}
