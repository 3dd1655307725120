//! Config-driven front end for the selfadj library.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use config::{CommandName, Format, RunConfig};
use error::CliError;
use output::Artifacts;

/// Command-line overrides of the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<CommandName>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Result of a run: the main document when no output path is set, and the
/// files written.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub stdout: Option<String>,
    pub written: Vec<PathBuf>,
    pub notes: Vec<String>,
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

/// Validate, compute, then write every artifact; nothing is written when
/// any stage fails.
pub fn run(mut cfg: RunConfig, overrides: &Overrides) -> Result<RunOutcome, CliError> {
    if let Some(c) = overrides.command {
        cfg.command = c;
    }
    if let Some(p) = &overrides.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = overrides.format {
        cfg.output.format = f;
    }
    let report = commands::execute(&cfg)?;
    let mut artifacts = Artifacts::default();
    let mut outcome = RunOutcome { notes: report.notes, ..RunOutcome::default() };
    match &cfg.output.path {
        Some(p) => artifacts.add(p.clone(), report.main),
        None => outcome.stdout = Some(report.main),
    }
    for (path, text) in report.side {
        match path {
            Some(p) => artifacts.add(p, text),
            None => outcome.notes.push(text.trim_end().to_string()),
        }
    }
    outcome.written = artifacts.commit()?;
    Ok(outcome)
}
