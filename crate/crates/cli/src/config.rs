//! Run configuration: a JSON document whose fields command-line flags
//! override. The fully resolved form is embedded in every output so a run
//! can be repeated from its own report.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tailmean_core::DistributionSpec;

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "TAILMEAN_SEED";

/// Partially specified configuration as read from JSON or flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub input: Option<PathBuf>,
    pub distribution: Option<DistributionSpec>,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub kappa_const: Option<f64>,
    pub kappa: Option<f64>,
    pub perms: Option<usize>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub gauss_draws: Option<usize>,
    pub mu0: Option<PathBuf>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub moment_bound: Option<f64>,
    pub q: Option<f64>,
}

impl ConfigLayer {
    /// Fields set in `over` win.
    pub fn merge(self, over: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            input: over.input.or(self.input),
            distribution: over.distribution.or(self.distribution),
            alpha: over.alpha.or(self.alpha),
            theta: over.theta.or(self.theta),
            kappa_const: over.kappa_const.or(self.kappa_const),
            kappa: over.kappa.or(self.kappa),
            perms: over.perms.or(self.perms),
            seed: over.seed.or(self.seed),
            reps: over.reps.or(self.reps),
            gauss_draws: over.gauss_draws.or(self.gauss_draws),
            mu0: over.mu0.or(self.mu0),
            n: over.n.or(self.n),
            p: over.p.or(self.p),
            moment_bound: over.moment_bound.or(self.moment_bound),
            q: over.q.or(self.q),
        }
    }

    /// Reads a config file. A previous report is accepted too: its `config`
    /// member is used.
    pub fn from_file(path: &Path) -> CliResult<ConfigLayer> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<ConfigLayer> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let value = match value {
            serde_json::Value::Object(mut map)
                if map.contains_key("config") && map.contains_key("command") =>
            {
                map.remove("config").unwrap_or_default()
            }
            other => other,
        };
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Configuration with defaults applied and invariants checked. The worker
/// count is deliberately absent: it never changes results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub distribution: Option<DistributionSpec>,
    pub alpha: f64,
    pub theta: f64,
    pub kappa_const: f64,
    pub kappa: Option<f64>,
    pub perms: usize,
    pub seed: u64,
    pub reps: usize,
    pub gauss_draws: usize,
    pub mu0: Option<PathBuf>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub moment_bound: Option<f64>,
    pub q: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            distribution: None,
            alpha: 0.1,
            theta: 1.0,
            kappa_const: 1.0,
            kappa: None,
            perms: 1000,
            seed: 0,
            reps: 100,
            gauss_draws: 2000,
            mu0: None,
            n: None,
            p: None,
            moment_bound: None,
            q: None,
        }
    }
}

impl RunConfig {
    /// Applies defaults. The seed falls back to `TAILMEAN_SEED` when neither
    /// flags nor the config file set it.
    pub fn resolve(layer: ConfigLayer, env_seed: Option<&str>) -> CliResult<RunConfig> {
        let d = RunConfig::default();
        let seed = match (layer.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(text)) => text.trim().parse().map_err(|_| {
                CliError::Config(format!("{SEED_ENV}={text} is not an unsigned integer"))
            })?,
            (None, None) => d.seed,
        };
        let cfg = RunConfig {
            input: layer.input,
            distribution: layer.distribution.map(|spec| spec.with_seed(seed)),
            alpha: layer.alpha.unwrap_or(d.alpha),
            theta: layer.theta.unwrap_or(d.theta),
            kappa_const: layer.kappa_const.unwrap_or(d.kappa_const),
            kappa: layer.kappa,
            perms: layer.perms.unwrap_or(d.perms),
            seed,
            reps: layer.reps.unwrap_or(d.reps),
            gauss_draws: layer.gauss_draws.unwrap_or(d.gauss_draws),
            mu0: layer.mu0,
            n: layer.n,
            p: layer.p,
            moment_bound: layer.moment_bound,
            q: layer.q,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if !(self.kappa_const > 0.0 && self.kappa_const.is_finite()) {
            return bad(format!(
                "kappa-const must be positive, got {}",
                self.kappa_const
            ));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return bad(format!("kappa must be positive, got {k}"));
            }
        }
        if self.perms < 1 || self.reps < 1 || self.gauss_draws < 1 {
            return bad("perms, reps and gauss-draws must all be at least 1".into());
        }
        if let Some(spec) = &self.distribution {
            spec.validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn require_distribution(&self) -> CliResult<&DistributionSpec> {
        self.distribution.as_ref().ok_or_else(|| {
            CliError::Config("this command needs a `distribution` block in the config".into())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_env_is_fallback() {
        let file = ConfigLayer::from_json(r#"{"alpha": 0.2, "perms": 50, "seed": 3}"#).unwrap();
        let flags = ConfigLayer {
            alpha: Some(0.05),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(file.clone().merge(flags), Some("99")).unwrap();
        assert_eq!((cfg.alpha, cfg.perms, cfg.seed), (0.05, 50, 3));
        let no_seed = ConfigLayer::from_json(r#"{"alpha": 0.2}"#).unwrap();
        assert_eq!(
            RunConfig::resolve(no_seed.clone(), Some("99"))
                .unwrap()
                .seed,
            99
        );
        assert_eq!(RunConfig::resolve(no_seed.clone(), None).unwrap().seed, 0);
        assert!(RunConfig::resolve(no_seed, Some("x")).is_err());
    }

    #[test]
    fn validation_failures() {
        for text in [
            r#"{"alpha": 1.0}"#,
            r#"{"theta": 0}"#,
            r#"{"perms": 0}"#,
            r#"{"kappa": -1}"#,
            r#"{"distribution": {"family": "student_t", "dof": 2, "cov": {"kind": "identity"}, "n": 10, "p": 2}}"#,
        ] {
            let layer = ConfigLayer::from_json(text).unwrap();
            assert!(RunConfig::resolve(layer, None).is_err(), "{text}");
        }
        assert!(ConfigLayer::from_json(r#"{"alpah": 0.1}"#).is_err());
        assert!(ConfigLayer::from_json("not json").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let layer = ConfigLayer::from_json(
            r#"{"distribution": {"family": "pareto_log", "q": 3, "n": 20, "p": 4}, "reps": 7}"#,
        )
        .unwrap();
        let cfg = RunConfig::resolve(layer, None).unwrap();
        let report = serde_json::json!({"command": "coverage", "config": cfg});
        let again =
            RunConfig::resolve(ConfigLayer::from_json(&report.to_string()).unwrap(), None).unwrap();
        assert_eq!(cfg, again);
    }
}
