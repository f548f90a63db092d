//! Pipelines behind the subcommands: the data-driven confidence box, the
//! coverage study and the Gaussian-approximation check.
//!
//! Every replicate draws its data and permutations from a seed derived from
//! `(master seed, replicate index)`, so replicates can run in any order on
//! any number of threads.

use rayon::prelude::*;
use serde::Serialize;
use tailmean_core::seed::{derive_seed, DOMAIN_GAUSSIAN, DOMAIN_REPLICATE};
use tailmean_core::truncation::plain_mean;
use tailmean_core::*;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Data-driven simultaneous intervals for one sample.
#[derive(Debug, Clone)]
pub struct SciRun {
    pub spec: Truncation,
    pub plan: ResamplePlan,
    pub q_hat: f64,
    pub sci: Intervals,
    pub huber: Vec<f64>,
}

pub fn truncation_for(data: &Matrix, cfg: &RunConfig) -> CliResult<Truncation> {
    let spec = match cfg.kappa {
        Some(k) => TruncationSpec::with_kappa(data, k, cfg.theta),
        None => TruncationSpec::from_data(data, cfg.theta, cfg.kappa_const),
    };
    spec.map_err(|e| match e {
        Error::InvalidParameter(msg) => {
            CliError::Data(format!("cannot choose a truncation level: {msg}"))
        }
        other => other.into(),
    })
}

/// Truncation level, half-sampling cutoff `q_hat` and the resulting box.
pub fn run_sci(data: &Matrix, cfg: &RunConfig, seed: u64) -> CliResult<SciRun> {
    let spec = truncation_for(data, cfg)?;
    let plan = ResamplePlan::new(data.n(), cfg.perms, seed)?;
    let dist = resample_distribution(data, &spec, &plan)?;
    let q_hat = empirical_quantile(&dist, cfg.alpha)?;
    let sci = build_sci(data, &spec, q_hat, cfg.alpha)?;
    let huber = huber_estimate(data, &spec)?.vector;
    Ok(SciRun {
        spec,
        plan,
        q_hat,
        sci,
        huber,
    })
}

/// Seed of replicate `r` in a study driven by `seed`.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, DOMAIN_REPLICATE, r as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRecord {
    pub replicate: usize,
    pub seed: u64,
    pub kappa: f64,
    pub moment_bound: f64,
    pub cutoff: f64,
    pub covered: bool,
    pub mean_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSummary {
    pub reps: usize,
    pub nominal: f64,
    pub coverage: f64,
    pub std_error: f64,
    pub mean_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub records: Vec<CoverageRecord>,
    pub summary: CoverageSummary,
}

/// Repeats the confidence-box construction on fresh synthetic samples and
/// counts how often the true mean (zero) lies in every interval.
pub fn run_coverage(cfg: &RunConfig) -> CliResult<CoverageReport> {
    let dist = cfg.require_distribution()?;
    let records = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(cfg.seed, r);
            let data: Matrix = generate(&dist.with_seed(seed))?;
            let run = run_sci(&data, cfg, seed)?;
            let truth = vec![0.0; data.p()];
            let widths = run.sci.widths();
            Ok(CoverageRecord {
                replicate: r,
                seed,
                kappa: run.spec.kappa,
                moment_bound: run.spec.moment_bound,
                cutoff: run.q_hat,
                covered: run.sci.contains(&truth),
                mean_width: widths.iter().sum::<f64>() / widths.len() as f64,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let reps = records.len() as f64;
    let coverage = records.iter().filter(|r| r.covered).count() as f64 / reps;
    let summary = CoverageSummary {
        reps: records.len(),
        nominal: 1.0 - cfg.alpha,
        coverage,
        std_error: (coverage * (1.0 - coverage) / reps).sqrt(),
        mean_width: records.iter().map(|r| r.mean_width).sum::<f64>() / reps,
    };
    Ok(CoverageReport { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaRecord {
    pub replicate: usize,
    pub seed: u64,
    pub kappa: f64,
    pub moment_bound: f64,
    /// `sqrt(n) |mu_hat_kappa - mu|_inf`
    pub stat_truncated: f64,
    /// `sqrt(n) |mu_hat - mu|_inf`
    pub stat_plain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaReport {
    pub records: Vec<GaRecord>,
    pub diagnostics: GaDiagnostics,
    /// Mean of the per-replicate moment-bound estimates, fed to the theory ratios.
    pub moment_bound: f64,
    /// Common standard deviation multiplier of the Gaussian reference.
    pub reference_scale: f64,
    pub gaussian_seed: u64,
}

/// Kolmogorov distance between the sup-norm statistic of the (truncated and
/// plain) sample mean over `reps` synthetic samples and `gauss_draws` draws of
/// `|Y|_inf` with the true covariance.
pub fn run_ga_check(cfg: &RunConfig) -> CliResult<GaReport> {
    let dist = cfg.require_distribution()?;
    if dist.p < 2 {
        return Err(CliError::Config("ga-check needs p >= 2".into()));
    }
    let root_n = (dist.n as f64).sqrt();
    let records = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(cfg.seed, r);
            let data: Matrix = generate(&dist.with_seed(seed))?;
            let spec = truncation_for(&data, cfg)?;
            let sup = |v: Vec<f64>| root_n * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Ok(GaRecord {
                replicate: r,
                seed,
                kappa: spec.kappa,
                moment_bound: spec.moment_bound,
                stat_truncated: sup(truncated_mean(&data, &spec)?.vector),
                stat_plain: sup(plain_mean(&data).vector),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let (cov, scale) = dist.covariance()?;
    let gaussian_seed = derive_seed(cfg.seed, DOMAIN_GAUSSIAN, u64::MAX);
    let reference: Vec<f64> = sample_gaussian_max::<f64>(&cov, cfg.gauss_draws, gaussian_seed)?
        .into_iter()
        .map(|v| v * scale)
        .collect();
    let truncated: Vec<f64> = records.iter().map(|r| r.stat_truncated).collect();
    let plain: Vec<f64> = records.iter().map(|r| r.stat_plain).collect();
    let moment_bound = records.iter().map(|r| r.moment_bound).sum::<f64>() / records.len() as f64;
    let q = cfg.q.or(match dist.family {
        DistributionFamily::ParetoLog { q, .. } => Some(q),
        _ => None,
    });
    let theory = theory_diagnostics(dist.n, dist.p, cfg.theta, moment_bound, q)?;
    Ok(GaReport {
        diagnostics: GaDiagnostics {
            ks_distance: ks_two_sample(&truncated, &reference)?,
            ks_distance_plain: ks_two_sample(&plain, &reference)?,
            theory,
        },
        records,
        moment_bound,
        reference_scale: scale,
        gaussian_seed,
    })
}
