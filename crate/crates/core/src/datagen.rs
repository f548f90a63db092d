//! Seeded synthetic data: correlated Gaussian, correlated Student t, and a
//! symmetric law with tail `P(X >= x) = x^-q (ln x)^-2` beyond `x0`.
//!
//! All families are centred, so the true mean vector is zero.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Open01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::gaussian::{CovarianceKind, CovarianceModel};
use crate::scalar::Scalar;
use crate::seed::{stream_rng, DOMAIN_DATA};

/// Rows per independently seeded generation block.
const ROW_BLOCK: usize = 256;

fn default_x0() -> f64 {
    std::f64::consts::E
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionFamily {
    Gaussian {
        cov: CovarianceKind,
    },
    /// Multivariate t scaled to the covariance of `cov`.
    StudentT {
        dof: f64,
        cov: CovarianceKind,
    },
    /// i.i.d. symmetric entries: tail `x^-q (ln x)^-2` beyond `x0`, uniform body on `[-x0, x0]`.
    ParetoLog {
        q: f64,
        #[serde(default = "default_x0")]
        x0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: DistributionFamily,
    pub n: usize,
    pub p: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 {
            return Err(invalid(format!(
                "need n >= 2 and p >= 1, got n = {}, p = {}",
                self.n, self.p
            )));
        }
        match &self.family {
            DistributionFamily::Gaussian { .. } => {}
            DistributionFamily::StudentT { dof, .. } => {
                if !(*dof > 2.0 && dof.is_finite()) {
                    return Err(invalid(format!("Student t needs dof > 2, got {dof}")));
                }
            }
            DistributionFamily::ParetoLog { q, x0 } => {
                if !(*q > 2.0 && q.is_finite()) {
                    return Err(invalid(format!("pareto_log needs q > 2, got {q}")));
                }
                if !(*x0 >= std::f64::consts::E && x0.is_finite()) {
                    return Err(invalid(format!("pareto_log needs x0 >= e, got {x0}")));
                }
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Covariance of one observation, as a model plus a common standard
    /// deviation multiplier.
    pub fn covariance(&self) -> Result<(CovarianceModel, f64)> {
        self.validate()?;
        match &self.family {
            DistributionFamily::Gaussian { cov } | DistributionFamily::StudentT { cov, .. } => {
                Ok((CovarianceModel::new(cov.clone(), self.p)?, 1.0))
            }
            DistributionFamily::ParetoLog { q, x0 } => {
                let law = ParetoLog::new(*q, *x0);
                Ok((CovarianceModel::identity(self.p), law.variance().sqrt()))
            }
        }
    }
}

/// Symmetric law with `P(X >= x) = G(x) = x^-q (ln x)^-2` for `x >= x0`.
#[derive(Debug, Clone, Copy)]
pub struct ParetoLog {
    q: f64,
    x0: f64,
    tail0: f64,
}

impl ParetoLog {
    pub fn new(q: f64, x0: f64) -> Self {
        Self {
            q,
            x0,
            tail0: Self::tail_fn(q, x0),
        }
    }

    fn tail_fn(q: f64, x: f64) -> f64 {
        x.powf(-q) * x.ln().powi(-2)
    }

    /// `P(X >= x)`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        if x >= self.x0 {
            Self::tail_fn(self.q, x)
        } else if x <= -self.x0 {
            1.0 - Self::tail_fn(self.q, -x)
        } else {
            // uniform body carries 1 - 2 G(x0) on [-x0, x0]
            self.tail0 + (1.0 - 2.0 * self.tail0) * (self.x0 - x) / (2.0 * self.x0)
        }
    }

    /// Solves `G(x) = v` for `0 < v <= G(x0)` by bisection on `s = ln x`.
    pub fn tail_inverse(&self, v: f64) -> f64 {
        let target = -v.ln();
        let h = |s: f64| self.q * s + 2.0 * s.ln();
        // s >= 1 makes 2 ln s >= 0, so target / q bounds the root from above
        let s0 = self.x0.ln();
        let mut hi = (target / self.q).max(s0);
        let mut lo = ((target - 2.0 * hi.ln()) / self.q).max(s0);
        if h(hi) < target {
            hi = hi.max(lo + 1.0);
            while h(hi) < target {
                hi = lo + 2.0 * (hi - lo);
            }
        }
        // |d ln x| = |dx / x|, so this is a relative tolerance on x
        while hi - lo > 1e-12 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if h(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    }

    /// Inverse-CDF draw from one open-interval uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        if u < self.tail0 {
            self.tail_inverse(u)
        } else if u > 1.0 - self.tail0 {
            -self.tail_inverse(1.0 - u)
        } else {
            -self.x0 + 2.0 * self.x0 * (u - self.tail0) / (1.0 - 2.0 * self.tail0)
        }
    }

    /// `E X^2`, with the tail integral `int_{x0}^inf 2x G(x) dx` evaluated by
    /// composite Simpson after mapping `[x0, inf)` onto `(0, 1]`.
    pub fn variance(&self) -> f64 {
        let (q, x0) = (self.q, self.x0);
        let s0 = x0.ln();
        let body = (1.0 - 2.0 * self.tail0) * x0 * x0 / 3.0;
        // w = exp(-(q-2)(s - s0)), s = ln x
        let integrand = |w: f64| {
            if w <= 0.0 {
                0.0
            } else {
                let s = s0 - w.ln() / (q - 2.0);
                s.powi(-2)
            }
        };
        let intervals = 200_000;
        let h = 1.0 / intervals as f64;
        let mut acc = integrand(0.0) + integrand(1.0);
        for k in 1..intervals {
            let w = k as f64 * h;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * integrand(w);
        }
        let tail_integral = 2.0 * ((2.0 - q) * s0).exp() / (q - 2.0) * acc * h / 3.0;
        body + 2.0 * (x0 * x0 * self.tail0 + tail_integral)
    }
}

/// `n` i.i.d. rows from `spec`, identical for any thread count.
pub fn generate<T: Scalar>(spec: &DistributionSpec) -> Result<DataMatrix<T>> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    enum Sampler {
        Gaussian(CovarianceModel),
        StudentT(CovarianceModel, ChiSquared<f64>, f64, f64),
        ParetoLog(ParetoLog),
    }
    let sampler = match &spec.family {
        DistributionFamily::Gaussian { cov } => {
            Sampler::Gaussian(CovarianceModel::new(cov.clone(), p)?)
        }
        DistributionFamily::StudentT { dof, cov } => Sampler::StudentT(
            CovarianceModel::new(cov.clone(), p)?,
            ChiSquared::new(*dof).map_err(|e| invalid(e.to_string()))?,
            *dof,
            ((dof - 2.0) / dof).sqrt(),
        ),
        DistributionFamily::ParetoLog { q, x0 } => Sampler::ParetoLog(ParetoLog::new(*q, *x0)),
    };
    let blocks = n.div_ceil(ROW_BLOCK);
    let values: Vec<T> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let rows = ROW_BLOCK.min(n - b * ROW_BLOCK);
            let mut rng = stream_rng(spec.seed, DOMAIN_DATA, b as u64);
            let mut out = Vec::with_capacity(rows * p);
            let mut y = vec![0.0; p];
            for _ in 0..rows {
                match &sampler {
                    Sampler::Gaussian(cov) => cov.sample_into(&mut rng, &mut y),
                    Sampler::StudentT(cov, chi, dof, unit) => {
                        cov.sample_into(&mut rng, &mut y);
                        let w = (chi.sample(&mut rng) / dof).sqrt();
                        y.iter_mut().for_each(|v| *v *= unit / w);
                    }
                    Sampler::ParetoLog(law) => y.iter_mut().for_each(|v| *v = law.sample(&mut rng)),
                }
                out.extend(y.iter().map(|&v| T::of(v)));
            }
            out
        })
        .collect();
    DataMatrix::new(n, p, values)
}
