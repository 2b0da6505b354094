//! Run configuration: a TOML file overlaid with `RDFTOPO_*` environment variables.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::acquire::{CommandTemplate, ExternalTools};
use crate::hash::TermHasher;
use crate::powerlaw::{Estimator, FitOptions};
use crate::measures::PageRankParams;
use crate::report::AnalysisOptions;

pub const ENV_PREFIX: &str = "RDFTOPO_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Concurrent download/acquire/prepare jobs.
    pub workers_prepare: usize,
    /// Concurrent build/analyze jobs; each holds one graph in memory.
    pub workers_analyze: usize,
    pub hash: TermHasher,
    pub pagerank: PageRankParams,
    pub fit: FitOptions,
    pub tools: ExternalTools,
    /// Seconds allowed for HEAD probes and for connecting/reading during downloads.
    pub http_timeout_secs: u64,
    /// Write degree distribution plot data next to each report.
    pub plots: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            workers_prepare: 28,
            workers_analyze: 12,
            hash: TermHasher::default(),
            pagerank: PageRankParams::default(),
            fit: FitOptions::default(),
            tools: ExternalTools::default(),
            http_timeout_secs: 30,
            plots: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("environment variable {var}={value:?}: {reason}")]
    Env { var: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path` (defaults when `None`), then applies the process environment.
    pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|source| ConfigError::Io { path: p.display().to_string(), source })?;
                Config::from_toml(&text)?
            }
            None => Config::default(),
        };
        config.apply_env(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    /// Applies `RDFTOPO_*` overrides from `vars`; other variables are ignored.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (key, value) in vars {
            let (key, value) = (key.as_ref(), value.as_ref());
            let Some(name) = key.strip_prefix(ENV_PREFIX) else { continue };
            let bad = |reason: &str| ConfigError::Env { var: key.to_owned(), value: value.to_owned(), reason: reason.to_owned() };
            match name {
                "WORKERS_PREPARE" => self.workers_prepare = value.parse().map_err(|_| bad("expected a positive integer"))?,
                "WORKERS_ANALYZE" => self.workers_analyze = value.parse().map_err(|_| bad("expected a positive integer"))?,
                "HASH_SEED" => self.hash.seed = value.parse().map_err(|_| bad("expected an unsigned integer"))?,
                "HASH_ALGORITHM" => {
                    self.hash.algorithm = serde_json::from_value(value.to_ascii_lowercase().into())
                        .map_err(|_| bad("unknown hash algorithm"))?
                }
                "DAMPING" => self.pagerank.damping = value.parse().map_err(|_| bad("expected a number"))?,
                "PAGERANK_TOLERANCE" => self.pagerank.tolerance = value.parse().map_err(|_| bad("expected a number"))?,
                "PAGERANK_MAX_ITERATIONS" => {
                    self.pagerank.max_iterations = value.parse().map_err(|_| bad("expected an integer"))?
                }
                "ESTIMATOR" => {
                    self.fit.estimator = match value.to_ascii_lowercase().as_str() {
                        "exact" => Estimator::Exact,
                        "approximate" => Estimator::Approximate,
                        _ => return Err(bad("expected exact or approximate")),
                    }
                }
                "MIN_TAIL" => self.fit.min_tail = value.parse().map_err(|_| bad("expected an integer"))?,
                "CONVERTER" => self.tools.converter = non_empty(value).map(CommandTemplate::new),
                "EXTRACTOR" => self.tools.extractor = non_empty(value).map(CommandTemplate::new),
                "HTTP_TIMEOUT" => self.http_timeout_secs = value.parse().map_err(|_| bad("expected seconds"))?,
                "PLOTS" => self.plots = parse_bool(value).ok_or_else(|| bad("expected true or false"))?,
                // RDFTOPO_CONFIG and friends belong to the command line front end
                _ => {}
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workers_prepare == 0 || self.workers_analyze == 0 {
            return Err(ConfigError::Invalid("worker limits must be at least 1".into()));
        }
        if !(self.pagerank.damping > 0.0 && self.pagerank.damping < 1.0) {
            return Err(ConfigError::Invalid(format!("damping {} outside (0, 1)", self.pagerank.damping)));
        }
        if !(self.pagerank.tolerance > 0.0) {
            return Err(ConfigError::Invalid("PageRank tolerance must be positive".into()));
        }
        if self.fit.min_tail < 2 {
            return Err(ConfigError::Invalid("min_tail must be at least 2".into()));
        }
        Ok(())
    }

    pub fn analysis(&self) -> AnalysisOptions {
        AnalysisOptions { pagerank: self.pagerank, fit: self.fit }
    }

    pub fn http_timeout(&self) -> Duration {
        Duration::from_secs(self.http_timeout_secs.max(1))
    }
}

fn non_empty(s: &str) -> Option<&str> {
    let s = s.trim();
    (!s.is_empty()).then_some(s)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}
