//! Top-level job file and overrides from the command line.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    Prob,
    Cone,
    Fig2,
    BinomMode,
    BinomSummary,
    Simpson,
    FigData,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Prob => "prob",
            Command::Cone => "cone",
            Command::Fig2 => "fig2",
            Command::BinomMode => "binom-mode",
            Command::BinomSummary => "binom-summary",
            Command::Simpson => "simpson",
            Command::FigData => "fig-data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "empty_model")]
    pub model: serde_json::Value,
}

fn empty_model() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if cfg.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        Ok(cfg)
    }

    /// Command-line values win over the file.
    pub fn with_overrides(mut self, seed: Option<u64>, threads: Option<usize>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if threads.is_some() {
            self.threads = threads;
        }
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Parses `model` into the command's schema.
    pub fn model<T: serde::de::DeserializeOwned>(&self) -> CliResult<T> {
        T::deserialize(&self.model).map_err(|e| CliError::Config(format!("model: {e}")))
    }
}
