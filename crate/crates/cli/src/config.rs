//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and `#` comments are skipped.
//! Covariates are declared in column order as `covariate.NAME = KIND` with
//! `KIND` one of `continuous`, `binary` or `nominal:LEVEL1,LEVEL2,...`.
//! Later assignments override earlier ones, so command-line overrides are
//! simply applied after the file.

use std::path::PathBuf;

use survfuse::inference::{BbcConfig, BiasSign};
use survfuse::iv::SplitMode;
use survfuse::select::{Criterion, PipelineConfig};
use survfuse::split::SplitMethod;
use survfuse::{Covariate, Schema};

use crate::CliError;

/// Every key understood by [`RunConfig::set`], for `--help` and errors.
pub const KEYS: &[&str] = &[
    "input",
    "test_input",
    "output",
    "time",
    "status",
    "covariate.NAME",
    "selection",
    "split_mode",
    "split_method",
    "shape",
    "gs_sss_switch",
    "min_child_size",
    "min_child_events",
    "max_subset_levels",
    "max_depth",
    "min_node_size",
    "min_node_events",
    "iv_min_size",
    "iv_min_events",
    "fold_mode",
    "one_se",
    "n_lambda",
    "lambda_min_ratio",
    "sort_by_median",
    "truncate_depth",
    "bootstrap",
    "bias_sign",
    "ci_level",
    "seed",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub test_input: Option<PathBuf>,
    pub output: PathBuf,
    pub time_column: String,
    pub status_column: String,
    pub covariates: Vec<Covariate>,
    pub selection: Criterion,
    pub pipeline: PipelineConfig,
    /// Zero disables the bootstrap correction.
    pub bootstrap: usize,
    pub bias_sign: BiasSign,
    pub ci_level: f64,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            test_input: None,
            output: PathBuf::from("."),
            time_column: "time".into(),
            status_column: "status".into(),
            covariates: Vec::new(),
            selection: Criterion::CrossValidation { folds: 10 },
            pipeline: PipelineConfig::default(),
            bootstrap: BbcConfig::default().replicates,
            bias_sign: BiasSign::Subtract,
            ci_level: 0.95,
            seed: None,
        }
    }
}

/// `(key, value)` pairs of a config file, in order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Split a `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String), CliError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| CliError::Config(format!("override `{s}` is not `key=value`")))
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn boolean(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("`{key}`: expected true or false, got `{value}`"))),
    }
}

fn split_mode(key: &str, value: &str) -> Result<SplitMode, CliError> {
    match value {
        "iv" => Ok(SplitMode::Iv),
        "plain" => Ok(SplitMode::Plain),
        _ => Err(CliError::Config(format!("`{key}`: expected iv or plain, got `{value}`"))),
    }
}

/// `cv`, `cv:V`, `aic`, `bic` or `test`.
pub fn parse_selection(value: &str) -> Result<Criterion, CliError> {
    let bad = || CliError::Config(format!("selection `{value}`: expected cv[:V], aic, bic or test"));
    match value {
        "aic" => Ok(Criterion::Aic),
        "bic" => Ok(Criterion::Bic),
        "test" | "test_sample" => Ok(Criterion::TestSample),
        "cv" => Ok(Criterion::CrossValidation { folds: 10 }),
        _ => {
            let folds = value.strip_prefix("cv:").or_else(|| value.strip_prefix("cv")).ok_or_else(bad)?;
            let folds: usize = folds.parse().map_err(|_| bad())?;
            if folds < 2 {
                return Err(CliError::Config(format!("selection `{value}`: need at least 2 folds")));
            }
            Ok(Criterion::CrossValidation { folds })
        }
    }
}

fn covariate(name: &str, kind: &str) -> Result<Covariate, CliError> {
    match kind {
        "continuous" => Ok(Covariate::continuous(name)),
        "binary" => Ok(Covariate::binary(name)),
        _ => match kind.strip_prefix("nominal:") {
            Some(levels) => Ok(Covariate::nominal(name, levels.split(',').map(str::trim))),
            None => Err(CliError::Config(format!("covariate `{name}`: unknown kind `{kind}`"))),
        },
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let tree = &mut self.pipeline.tree;
        let fusion = &mut self.pipeline.fusion;
        match key {
            "input" => self.input = Some(value.into()),
            "test_input" => self.test_input = Some(value.into()),
            "output" => self.output = value.into(),
            "time" => self.time_column = value.into(),
            "status" => self.status_column = value.into(),
            "selection" => self.selection = parse_selection(value)?,
            "split_mode" => tree.mode = split_mode(key, value)?,
            "split_method" => {
                tree.split.method = match value {
                    "auto" => SplitMethod::Auto,
                    "greedy" => SplitMethod::Greedy,
                    "smooth" => SplitMethod::Smooth,
                    _ => return Err(CliError::Config(format!("`{key}`: expected auto, greedy or smooth, got `{value}`"))),
                }
            }
            "shape" => tree.split.shape = number(key, value)?,
            "gs_sss_switch" => tree.split.gs_sss_switch = number(key, value)?,
            "min_child_size" => tree.split.min_child_size = number(key, value)?,
            "min_child_events" => tree.split.min_child_events = number(key, value)?,
            "max_subset_levels" => tree.split.max_subset_levels = number(key, value)?,
            "max_depth" => tree.max_depth = number(key, value)?,
            "min_node_size" => tree.min_node_size = number(key, value)?,
            "min_node_events" => tree.min_node_events = number(key, value)?,
            "iv_min_size" => tree.iv_min_size = number(key, value)?,
            "iv_min_events" => tree.iv_min_events = number(key, value)?,
            "fold_mode" => self.pipeline.fold_mode = split_mode(key, value)?,
            "one_se" => self.pipeline.one_se = boolean(key, value)?,
            "n_lambda" => fusion.n_lambda = number(key, value)?,
            "lambda_min_ratio" => fusion.lambda_min_ratio = number(key, value)?,
            "sort_by_median" => fusion.sort_by_median = boolean(key, value)?,
            "truncate_depth" => fusion.truncate_depth = if value == "none" { None } else { Some(number(key, value)?) },
            "bootstrap" => self.bootstrap = number(key, value)?,
            "bias_sign" => {
                self.bias_sign = match value {
                    "subtract" => BiasSign::Subtract,
                    "add" => BiasSign::Add,
                    _ => return Err(CliError::Config(format!("`{key}`: expected subtract or add, got `{value}`"))),
                }
            }
            "ci_level" => {
                let level: f64 = number(key, value)?;
                if !(level > 0.0 && level < 1.0) {
                    return Err(CliError::Config(format!("`{key}` must lie in (0, 1), got {level}")));
                }
                self.ci_level = level;
            }
            "seed" => self.seed = Some(number(key, value)?),
            _ => match key.strip_prefix("covariate.") {
                Some(name) if !name.is_empty() => {
                    let c = covariate(name, value)?;
                    match self.covariates.iter_mut().find(|x| x.name == name) {
                        Some(slot) => *slot = c,
                        None => self.covariates.push(c),
                    }
                }
                _ => return Err(CliError::Config(format!("unknown key `{key}` (known: {})", KEYS.join(", ")))),
            },
        }
        Ok(())
    }

    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let mut config = RunConfig::default();
        for (k, v) in pairs {
            config.set(k, v)?;
        }
        Ok(config)
    }

    pub fn schema(&self) -> Result<Schema, CliError> {
        if self.covariates.is_empty() {
            return Err(CliError::Config("no covariates declared (use `covariate.NAME = KIND`)".into()));
        }
        Schema::new(self.covariates.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("`seed` is required".into()))
    }
}
