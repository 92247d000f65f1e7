//! Job runner behind the `dpp-lab` binary. A job is a JSON file naming a
//! command and its model; the result is one JSON document plus, for the
//! figure commands, CSV files.

pub mod binom_cmd;
pub mod config;
pub mod error;
pub mod format;
pub mod gauss_cmd;

use serde::{Deserialize, Serialize};

pub use config::{Command, RunConfig, SCHEMA_VERSION};
pub use error::{CliError, CliResult, ErrorReport};

/// Output document shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<M, R> {
    pub schema_version: u32,
    pub command: Command,
    pub seed: u64,
    /// The model after presets and defaults were applied. Feeding it back as
    /// `model` reproduces the run.
    pub effective_config: M,
    pub result: R,
    /// CSV files written next to the JSON, relative to the output directory.
    pub files: Vec<String>,
}

/// Everything a run produces, before anything touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub json: String,
    pub files: Vec<(String, Vec<u8>)>,
}

pub(crate) fn finish<M: Serialize, R: Serialize>(
    cfg: &RunConfig,
    model: &M,
    result: &R,
    files: Vec<(String, Vec<u8>)>,
) -> CliResult<Artifacts> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command: cfg.command,
        seed: cfg.seed(),
        effective_config: model,
        result,
        files: files.iter().map(|(n, _)| n.clone()).collect(),
    };
    let json = format::to_json(&envelope).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Artifacts { json, files })
}

/// Runs a parsed job in the current rayon pool.
pub fn run(cfg: &RunConfig) -> CliResult<Artifacts> {
    log::info!("running {} with seed {}", cfg.command.name(), cfg.seed());
    match cfg.command {
        Command::Check => gauss_cmd::check(cfg),
        Command::Prob => gauss_cmd::prob(cfg),
        Command::Cone => gauss_cmd::cone(cfg),
        Command::Fig2 => gauss_cmd::fig2(cfg),
        Command::Simpson => gauss_cmd::simpson(cfg),
        Command::BinomMode => binom_cmd::mode(cfg),
        Command::BinomSummary => binom_cmd::summary(cfg),
        Command::FigData => fig_data(cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    Fig1Contours,
    Fig2Scatter,
    Fig3Geometry,
    Fig4Contours,
}

#[derive(Deserialize)]
struct KindOnly {
    kind: FigureKind,
}

fn fig_data(cfg: &RunConfig) -> CliResult<Artifacts> {
    let kind = KindOnly::deserialize(&cfg.model)
        .map_err(|_| CliError::Config("model.kind must be one of fig1_contours, fig2_scatter, fig3_geometry, fig4_contours".into()))?
        .kind;
    match kind {
        FigureKind::Fig1Contours => binom_cmd::fig1_contours(cfg),
        FigureKind::Fig4Contours => binom_cmd::fig4_contours(cfg),
        FigureKind::Fig2Scatter => gauss_cmd::fig2_scatter(cfg),
        FigureKind::Fig3Geometry => gauss_cmd::fig3_geometry(cfg),
    }
}

/// File-name stem check for user-supplied labels.
pub(crate) fn check_label(label: &str) -> CliResult<()> {
    if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(CliError::Config(format!(
            "label {label:?} must be non-empty and use only ASCII letters, digits, '_' or '-'"
        )));
    }
    Ok(())
}
