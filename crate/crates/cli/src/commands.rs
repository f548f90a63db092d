//! One function per subcommand. Each returns the JSON summary text and,
//! when an output path is given, also writes the summary and its table.

use std::path::Path;

use serde::Serialize;
use tailmean_core::*;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::experiment::{run_coverage, run_ga_check, run_sci, truncation_for};
use crate::ingest::{read_matrix, read_vector};
use crate::report::{csv_text, provenance_line, table_path, to_json, write_text};

/// Text products of a command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: String,
    pub table: Option<String>,
}

impl Outcome {
    pub fn write(&self, output: Option<&Path>) -> CliResult<()> {
        if let Some(path) = output {
            write_text(path, &self.summary)?;
            if let Some(table) = &self.table {
                write_text(&table_path(path), table)?;
            }
        }
        Ok(())
    }
}

fn load_data(cfg: &RunConfig) -> CliResult<Matrix> {
    match (&cfg.input, &cfg.distribution) {
        (Some(path), _) => read_matrix(path),
        (None, Some(spec)) => Ok(generate(spec)?),
        (None, None) => Err(CliError::Config(
            "no data: pass --input or a `distribution` block".into(),
        )),
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

#[derive(Serialize)]
struct IntervalRow {
    index: usize,
    lower: f64,
    upper: f64,
    huber: f64,
}

#[derive(Serialize)]
struct SciSummary<'a> {
    command: &'static str,
    config: &'a RunConfig,
    n: usize,
    p: usize,
    kappa: f64,
    moment_bound: f64,
    q_hat: f64,
    alpha: f64,
    perms: usize,
    seed: u64,
    dropped_row: Option<usize>,
    intervals: Vec<IntervalRow>,
}

pub fn cmd_sci(cfg: &RunConfig) -> CliResult<(Outcome, Intervals)> {
    let data = load_data(cfg)?;
    let run = run_sci(&data, cfg, cfg.seed)?;
    let intervals: Vec<IntervalRow> = (0..data.p())
        .map(|j| IntervalRow {
            index: j,
            lower: run.sci.lower[j],
            upper: run.sci.upper[j],
            huber: run.huber[j],
        })
        .collect();
    let table = csv_text(
        &provenance_line("sci", cfg)?,
        &["index", "lower", "upper", "huber"],
        intervals.iter().map(|r| {
            vec![
                r.index.to_string(),
                num(r.lower),
                num(r.upper),
                num(r.huber),
            ]
        }),
    )?;
    let summary = to_json(&SciSummary {
        command: "sci",
        config: cfg,
        n: data.n(),
        p: data.p(),
        kappa: run.spec.kappa,
        moment_bound: run.spec.moment_bound,
        q_hat: run.q_hat,
        alpha: cfg.alpha,
        perms: cfg.perms,
        seed: cfg.seed,
        dropped_row: run.plan.dropped_row,
        intervals,
    })?;
    Ok((
        Outcome {
            summary,
            table: Some(table),
        },
        run.sci,
    ))
}

#[derive(Serialize)]
struct TestSummary<'a> {
    command: &'static str,
    config: &'a RunConfig,
    n: usize,
    p: usize,
    kappa: f64,
    q_hat: f64,
    statistic: f64,
    threshold: f64,
    reject: bool,
}

pub fn cmd_test(cfg: &RunConfig) -> CliResult<(Outcome, Decision)> {
    let data = load_data(cfg)?;
    let mu0_path = cfg
        .mu0
        .as_ref()
        .ok_or_else(|| CliError::Config("test needs --mu0 <path>".into()))?;
    let mu0 = read_vector(mu0_path, data.p())?;
    let run = run_sci(&data, cfg, cfg.seed)?;
    let decision = test_mean(&data, &run.spec, &mu0, run.q_hat)?;
    let summary = to_json(&TestSummary {
        command: "test",
        config: cfg,
        n: data.n(),
        p: data.p(),
        kappa: run.spec.kappa,
        q_hat: run.q_hat,
        statistic: decision.statistic,
        threshold: decision.threshold,
        reject: decision.reject,
    })?;
    Ok((
        Outcome {
            summary,
            table: None,
        },
        decision,
    ))
}

#[derive(Serialize)]
struct CoverageOut<'a> {
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    summary: &'a crate::experiment::CoverageSummary,
}

pub fn cmd_coverage(cfg: &RunConfig) -> CliResult<(Outcome, crate::experiment::CoverageReport)> {
    let report = run_coverage(cfg)?;
    let summary = to_json(&CoverageOut {
        command: "coverage",
        config: cfg,
        summary: &report.summary,
    })?;
    let table = csv_text(
        &provenance_line("coverage", cfg)?,
        &[
            "replicate",
            "seed",
            "kappa",
            "moment_bound",
            "cutoff",
            "covered",
            "mean_width",
        ],
        report.records.iter().map(|r| {
            vec![
                r.replicate.to_string(),
                r.seed.to_string(),
                num(r.kappa),
                num(r.moment_bound),
                num(r.cutoff),
                u8::from(r.covered).to_string(),
                num(r.mean_width),
            ]
        }),
    )?;
    Ok((
        Outcome {
            summary,
            table: Some(table),
        },
        report,
    ))
}

#[derive(Serialize)]
struct GaOut<'a> {
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    diagnostics: &'a GaDiagnostics,
    moment_bound: f64,
    reference_scale: f64,
    gaussian_seed: u64,
}

pub fn cmd_ga_check(cfg: &RunConfig) -> CliResult<(Outcome, crate::experiment::GaReport)> {
    let report = run_ga_check(cfg)?;
    let summary = to_json(&GaOut {
        command: "ga-check",
        config: cfg,
        diagnostics: &report.diagnostics,
        moment_bound: report.moment_bound,
        reference_scale: report.reference_scale,
        gaussian_seed: report.gaussian_seed,
    })?;
    let table = csv_text(
        &provenance_line("ga-check", cfg)?,
        &[
            "replicate",
            "seed",
            "kappa",
            "moment_bound",
            "stat_truncated",
            "stat_plain",
        ],
        report.records.iter().map(|r| {
            vec![
                r.replicate.to_string(),
                r.seed.to_string(),
                num(r.kappa),
                num(r.moment_bound),
                num(r.stat_truncated),
                num(r.stat_plain),
            ]
        }),
    )?;
    Ok((
        Outcome {
            summary,
            table: Some(table),
        },
        report,
    ))
}

/// Synthetic sample as CSV; the summary is the CSV itself.
pub fn cmd_generate(cfg: &RunConfig) -> CliResult<Outcome> {
    let spec = cfg.require_distribution()?;
    let data: Matrix = generate(spec)?;
    let header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let text = csv_text(
        &provenance_line("generate", cfg)?,
        &header,
        data.rows().map(|r| r.iter().map(|&v| num(v)).collect()),
    )?;
    Ok(Outcome {
        summary: text,
        table: None,
    })
}

#[derive(Serialize)]
struct DiagnoseOut<'a> {
    command: &'static str,
    config: &'a RunConfig,
    n: usize,
    p: usize,
    moment_bound: f64,
    #[serde(flatten)]
    theory: TheoryDiagnostics,
    truncated_regime_ok: bool,
    plain_regime_ok: Option<bool>,
}

/// Theory ratios from explicit `n`, `p`, moment bound, or from the data.
pub fn cmd_diagnose(cfg: &RunConfig) -> CliResult<Outcome> {
    let data = if cfg.n.is_some() && cfg.p.is_some() && cfg.moment_bound.is_some() {
        None
    } else {
        Some(load_data(cfg)?)
    };
    let n = cfg
        .n
        .or(data.as_ref().map(|d| d.n()))
        .expect("n from flags or data");
    let p = cfg
        .p
        .or(data.as_ref().map(|d| d.p()))
        .expect("p from flags or data");
    let moment_bound = match (cfg.moment_bound, &data) {
        (Some(m), _) => m,
        (None, Some(d)) => truncation_for(d, cfg)?.moment_bound,
        (None, None) => unreachable!("data loaded when the moment bound is missing"),
    };
    let theory = theory_diagnostics(n, p, cfg.theta, moment_bound, cfg.q)?;
    let summary = to_json(&DiagnoseOut {
        command: "diagnose",
        config: cfg,
        n,
        p,
        moment_bound,
        theory,
        truncated_regime_ok: theory.truncated_regime_ok(),
        plain_regime_ok: theory.plain_regime_ok(),
    })?;
    Ok(Outcome {
        summary,
        table: None,
    })
}
