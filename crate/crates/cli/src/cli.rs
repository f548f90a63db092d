use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{
    cmd_coverage, cmd_diagnose, cmd_ga_check, cmd_generate, cmd_sci, cmd_test, Outcome,
};
use crate::config::{ConfigLayer, RunConfig, SEED_ENV};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "tailmean",
    version,
    about = "Simultaneous confidence intervals for high-dimensional means under heavy tails"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simultaneous confidence intervals with the half-sampling cutoff
    Sci(RunArgs),
    /// Sup-norm test of H0: mu = mu0
    Test(RunArgs),
    /// Coverage study on synthetic data with known mean
    Coverage(RunArgs),
    /// Kolmogorov distance to the Gaussian reference for truncated and plain means
    GaCheck(RunArgs),
    /// Write a synthetic sample as CSV
    Generate(RunArgs),
    /// Growth-condition ratios and the rate proxy
    Diagnose(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sci(_) => "sci",
            Command::Test(_) => "test",
            Command::Coverage(_) => "coverage",
            Command::GaCheck(_) => "ga-check",
            Command::Generate(_) => "generate",
            Command::Diagnose(_) => "diagnose",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Sci(a)
            | Command::Test(a)
            | Command::Coverage(a)
            | Command::GaCheck(a)
            | Command::Generate(a)
            | Command::Diagnose(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// CSV with one observation per row
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON config (or a previous report, whose `config` is reused)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Summary path; tables go next to it with a .csv extension
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Multiplier on the truncation-level rule
    #[arg(long = "kappa-const")]
    pub kappa_const: Option<f64>,
    /// Explicit truncation level, bypassing the rule
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of permutations J
    #[arg(long)]
    pub perms: Option<usize>,
    /// Master seed (falls back to the config, then TAILMEAN_SEED)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of synthetic datasets R
    #[arg(long)]
    pub reps: Option<usize>,
    /// Number of Gaussian reference draws B
    #[arg(long = "gauss-draws")]
    pub gauss_draws: Option<usize>,
    /// Worker threads; never changes results
    #[arg(long)]
    pub workers: Option<usize>,
    /// File holding the hypothesised mean vector
    #[arg(long)]
    pub mu0: Option<PathBuf>,
    /// Inline JSON distribution block, e.g. '{"family":"gaussian","cov":{"kind":"identity"},"n":200,"p":50}'
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long = "moment-bound")]
    pub moment_bound: Option<f64>,
    /// Moment order for the untruncated-mean growth condition
    #[arg(long)]
    pub q: Option<f64>,
}

impl RunArgs {
    fn layer(&self) -> CliResult<ConfigLayer> {
        let distribution = match &self.dist {
            Some(text) => Some(
                serde_json::from_str(text).map_err(|e| CliError::Config(format!("--dist: {e}")))?,
            ),
            None => None,
        };
        Ok(ConfigLayer {
            input: self.input.clone(),
            distribution,
            alpha: self.alpha,
            theta: self.theta,
            kappa_const: self.kappa_const,
            kappa: self.kappa,
            perms: self.perms,
            seed: self.seed,
            reps: self.reps,
            gauss_draws: self.gauss_draws,
            mu0: self.mu0.clone(),
            n: self.n,
            p: self.p,
            moment_bound: self.moment_bound,
            q: self.q,
        })
    }

    /// File layer, then flags on top, then defaults and the env seed.
    pub fn resolve(&self, env_seed: Option<&str>) -> CliResult<RunConfig> {
        let base = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        RunConfig::resolve(base.merge(self.layer()?), env_seed)
    }
}

/// Runs a parsed command on a pool of the requested size. Returns the
/// summary text that goes to stdout when no output path is given.
pub fn run(command: &Command) -> CliResult<String> {
    let args = command.args();
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = args.resolve(env_seed.as_deref())?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers < 1 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let outcome: Outcome = pool.install(|| -> CliResult<Outcome> {
        Ok(match command {
            Command::Sci(_) => cmd_sci(&cfg)?.0,
            Command::Test(_) => cmd_test(&cfg)?.0,
            Command::Coverage(_) => cmd_coverage(&cfg)?.0,
            Command::GaCheck(_) => cmd_ga_check(&cfg)?.0,
            Command::Generate(_) => cmd_generate(&cfg)?,
            Command::Diagnose(_) => cmd_diagnose(&cfg)?,
        })
    })?;
    outcome.write(args.output.as_deref())?;
    Ok(outcome.summary)
}
