//! Run configuration: TOML file, then command-line overrides, then validation.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rpsflow_core::{
    random_interior_state, IntegratorConfig, Method, ModelParams, RecurrenceConfig, SimplexPoint,
    Space, SystemState,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Seed used when neither the file nor the command line picks an initial state.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub integrator: IntegratorConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<RecurrenceConfig>,
    pub init: InitSpec,
    pub output: OutputSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitSpec {
    Random { seed: u64 },
    Explicit { x0: Vec<f64>, w0: Vec<f64> },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Random { seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Output file (a directory for `sweep`); standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mu: Vec<f64>,
}

/// Flags shared by every command. Each one overrides the matching config field.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with [model], [integrator], [recurrence], [init], [output] and [sweep] tables
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Number of strategies
    #[arg(long)]
    pub n: Option<usize>,
    /// Feedback strength shared by all favoring matrices
    #[arg(long)]
    pub mu: Option<f64>,
    /// Payoff amplitude `a` of the base game
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Coordinates the integrator works in
    #[arg(long, value_parser = parse_space)]
    pub space: Option<Space>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Fixed step (fixed-rk4) or initial step (adaptive-rk45)
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Draw the initial state from this seed (replaces an explicit init)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Recurrence radius
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn parse_space(s: &str) -> std::result::Result<Space, String> {
    s.parse()
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse()
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("config: {e}")))?;
        if let Some(amp) = value
            .get("model")
            .and_then(|m| m.get("amplitude"))
            .filter(|a| a.is_array())
        {
            return Err(CliError::Validation(format!(
                "model.amplitude: a single scalar is required, per-edge amplitudes ({amp}) are not supported"
            )));
        }
        RunConfig::deserialize(value).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    /// Loads `--config` (if any), applies the flags on top and validates.
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(args);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, args: &RunArgs) {
        let m = &mut self.model;
        set(&mut m.n, args.n);
        set(&mut m.mu, args.mu);
        set(&mut m.amplitude, args.amplitude);
        let ic = &mut self.integrator;
        set(&mut ic.t_end, args.t_end);
        set(&mut ic.rtol, args.rtol);
        set(&mut ic.atol, args.atol);
        set(&mut ic.space, args.space);
        set(&mut ic.method, args.method);
        set(&mut ic.dt, args.dt);
        set(&mut ic.sample_interval, args.sample_interval);
        if let Some(seed) = args.seed {
            self.init = InitSpec::Random { seed };
        }
        if let Some(eps) = args.eps {
            self.recurrence.get_or_insert_with(Default::default).epsilon = eps;
        }
        if args.out.is_some() {
            self.output.path = args.out.clone();
        }
        set(&mut self.output.format, args.format);
    }

    pub fn validate(&self) -> Result<()> {
        self.model
            .validate()
            .map_err(|e| CliError::in_section("model", e))?;
        self.integrator
            .validate()
            .map_err(|e| CliError::in_section("integrator", e))?;
        if let Some(rc) = &self.recurrence {
            rc.validate()
                .map_err(|e| CliError::in_section("recurrence", e))?;
        }
        if let InitSpec::Explicit { .. } = self.init {
            self.initial_state()?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.mu.is_empty() {
                return Err(CliError::Validation("sweep.mu: list is empty".into()));
            }
            for &mu in &sweep.mu {
                self.model_with_mu(mu)
                    .map_err(|e| CliError::in_section("sweep", e))?;
            }
        }
        Ok(())
    }

    pub fn recurrence_or_default(&self) -> RecurrenceConfig {
        self.recurrence.clone().unwrap_or_default()
    }

    pub fn initial_state(&self) -> Result<SystemState> {
        let n = self.model.n;
        match &self.init {
            InitSpec::Random { seed } => Ok(random_interior_state(*seed, n)?),
            InitSpec::Explicit { x0, w0 } => {
                let point = |name: &str, v: &Vec<f64>| {
                    if v.len() != n {
                        return Err(CliError::Validation(format!(
                            "init.{name}: expected {n} entries (model.n), got {}",
                            v.len()
                        )));
                    }
                    SimplexPoint::new(v.clone())
                        .map_err(|e| CliError::Validation(format!("init.{name}: {e}")))
                };
                Ok(SystemState::new(point("x0", x0)?, point("w0", w0)?)?)
            }
        }
    }

    pub fn model_with_mu(&self, mu: f64) -> rpsflow_core::Result<ModelParams> {
        let params = ModelParams {
            mu,
            ..self.model.clone()
        };
        params.validate()?;
        Ok(params)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
