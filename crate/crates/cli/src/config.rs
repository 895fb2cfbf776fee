//! Flat `key = value` configuration.
//!
//! Every key has a default; files and `--set` overrides may only name known
//! keys. [`CliConfig::to_text`] writes every key, so an echoed file re-runs
//! the same experiment.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use strbf::experiment::ExperimentConfig;

pub const KEYS: &[&str] = &[
    "mg_a",
    "mg_b",
    "mg_delay",
    "mg_exponent",
    "mg_initial_value",
    "mg_horizon",
    "mg_integration_step",
    "mg_sample_interval",
    "snr_db",
    "noise_scope",
    "train_start",
    "train_end",
    "test_start",
    "test_end",
    "lag_count",
    "rbf_neurons",
    "strbf_neurons",
    "strbf_branch_input",
    "strbf_branches",
    "kernel",
    "eta_rbf",
    "eta_strbf",
    "spread_scale_rbf",
    "spread_scale_strbf",
    "init_range",
    "kmeans_init",
    "kmeans_max_iters",
    "kmeans_tol",
    "spread_min",
    "runs",
    "seed",
    "epochs",
    "smoothing_window",
    "prediction_run",
    "out",
    "plot",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub experiment: ExperimentConfig,
    pub out: PathBuf,
    pub plot: bool,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig::default(),
            out: PathBuf::from("results"),
            plot: false,
        }
    }
}

fn parse<T>(key: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("config key `{key}`: cannot parse {value:?}: {e}"))
}

impl CliConfig {
    pub fn get(&self, key: &str) -> Result<String> {
        let e = &self.experiment;
        let s = &e.series;
        Ok(match key {
            "mg_a" => s.a.to_string(),
            "mg_b" => s.b.to_string(),
            "mg_delay" => s.delay.to_string(),
            "mg_exponent" => s.exponent.to_string(),
            "mg_initial_value" => s.initial_value.to_string(),
            "mg_horizon" => s.horizon.to_string(),
            "mg_integration_step" => s.integration_step.to_string(),
            "mg_sample_interval" => s.sample_interval.to_string(),
            "snr_db" => e.snr_db.to_string(),
            "noise_scope" => e.noise_scope.to_string(),
            "train_start" => e.train_range.start.to_string(),
            "train_end" => e.train_range.end.to_string(),
            "test_start" => e.test_range.start.to_string(),
            "test_end" => e.test_range.end.to_string(),
            "lag_count" => e.lag_count.to_string(),
            "rbf_neurons" => e.rbf_neurons.to_string(),
            "strbf_neurons" => e.strbf_neurons.to_string(),
            "strbf_branch_input" => e.strbf_branch_input.to_string(),
            "strbf_branches" => e.strbf_branches.to_string(),
            "kernel" => e.kernel.to_string(),
            "eta_rbf" => e.eta_rbf.to_string(),
            "eta_strbf" => e.eta_strbf.to_string(),
            "spread_scale_rbf" => e.spread_scale_rbf.to_string(),
            "spread_scale_strbf" => e.spread_scale_strbf.to_string(),
            "init_range" => e.init_range.to_string(),
            "kmeans_init" => e.kmeans.init.to_string(),
            "kmeans_max_iters" => e.kmeans.max_iters.to_string(),
            "kmeans_tol" => e.kmeans.tol.to_string(),
            "spread_min" => e.kmeans.spread_min.to_string(),
            "runs" => e.runs.to_string(),
            "seed" => e.base_seed.to_string(),
            "epochs" => e.epochs.to_string(),
            "smoothing_window" => e.smoothing_window.to_string(),
            "prediction_run" => e.prediction_run.to_string(),
            "out" => self.out.display().to_string(),
            "plot" => self.plot.to_string(),
            other => bail!("unknown config key `{other}`"),
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let e = &mut self.experiment;
        let s = &mut e.series;
        match key {
            "mg_a" => s.a = parse(key, value)?,
            "mg_b" => s.b = parse(key, value)?,
            "mg_delay" => s.delay = parse(key, value)?,
            "mg_exponent" => s.exponent = parse(key, value)?,
            "mg_initial_value" => s.initial_value = parse(key, value)?,
            "mg_horizon" => s.horizon = parse(key, value)?,
            "mg_integration_step" => s.integration_step = parse(key, value)?,
            "mg_sample_interval" => s.sample_interval = parse(key, value)?,
            "snr_db" => e.snr_db = parse(key, value)?,
            "noise_scope" => e.noise_scope = parse(key, value)?,
            "train_start" => e.train_range.start = parse(key, value)?,
            "train_end" => e.train_range.end = parse(key, value)?,
            "test_start" => e.test_range.start = parse(key, value)?,
            "test_end" => e.test_range.end = parse(key, value)?,
            "lag_count" => e.lag_count = parse(key, value)?,
            "rbf_neurons" => e.rbf_neurons = parse(key, value)?,
            "strbf_neurons" => e.strbf_neurons = parse(key, value)?,
            "strbf_branch_input" => e.strbf_branch_input = parse(key, value)?,
            "strbf_branches" => e.strbf_branches = parse(key, value)?,
            "kernel" => e.kernel = parse(key, value)?,
            "eta_rbf" => e.eta_rbf = parse(key, value)?,
            "eta_strbf" => e.eta_strbf = parse(key, value)?,
            "spread_scale_rbf" => e.spread_scale_rbf = parse(key, value)?,
            "spread_scale_strbf" => e.spread_scale_strbf = parse(key, value)?,
            "init_range" => e.init_range = parse(key, value)?,
            "kmeans_init" => e.kmeans.init = parse(key, value)?,
            "kmeans_max_iters" => e.kmeans.max_iters = parse(key, value)?,
            "kmeans_tol" => e.kmeans.tol = parse(key, value)?,
            "spread_min" => e.kmeans.spread_min = parse(key, value)?,
            "runs" => e.runs = parse(key, value)?,
            "seed" => e.base_seed = parse(key, value)?,
            "epochs" => e.epochs = parse(key, value)?,
            "smoothing_window" => e.smoothing_window = parse(key, value)?,
            "prediction_run" => e.prediction_run = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "plot" => self.plot = parse(key, value)?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", n + 1))?;
            self.set(key.trim(), value).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text)
            .with_context(|| format!("in config file {}", path.display()))
    }

    /// Applies a `KEY=VALUE` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("override {assignment:?} is not KEY=VALUE"))?;
        self.set(key.trim(), value)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.get(key).expect("every listed key is readable"));
            out.push('\n');
        }
        out
    }
}
