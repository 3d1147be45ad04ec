//! Command-line front end for `invot-core`: parses configurations, runs the
//! forward, recovery and identifiability pipelines, and writes deterministic
//! CSV/JSON artifacts.

pub mod artifacts;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod inputs;

use std::path::Path;

use serde_json::{json, Value};

use crate::cli::Sub;
use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::inputs::Diagnostic;

/// Diagnostics of a configuration file. Syntax errors abort with their
/// position; everything else is collected.
pub fn validate_file(path: &Path) -> CliResult<Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text)?;
    match serde_json::from_value::<RunConfig>(value) {
        Ok(cfg) => Ok(cfg.diagnostics()),
        Err(e) => Ok(vec![Diagnostic::new("SchemaError", "$", e.to_string())]),
    }
}

/// Runs one parsed command line; the value is printed as a single JSON line.
pub fn execute(sub: Sub) -> CliResult<Value> {
    let cfg = match sub {
        Sub::Validate { config } => {
            let diagnostics = validate_file(&config)?;
            if let Some(first) = diagnostics.first() {
                println!("{}", json!({ "diagnostics": diagnostics }));
                return Err(CliError::config(
                    first.code.clone(),
                    format!("{} problem(s); first at {}: {}", diagnostics.len(), first.path, first.message),
                ));
            }
            return Ok(json!({ "diagnostics": diagnostics }));
        }
        Sub::Run { config } => RunConfig::load(&config)?,
        Sub::Forward(f) => f.into_config(Command::Forward, None)?,
        Sub::Potentials(f) => f.into_config(Command::Potentials, None)?,
        Sub::RecoverMap(f) => f.into_config(Command::RecoverMap, None)?,
        Sub::RecoverValues(f) => f.into_config(Command::RecoverValues, None)?,
        Sub::RecoverConcave(f) => f.into_config(Command::RecoverConcave, None)?,
        Sub::Identify(f) => f.into_config(Command::Identify, None)?,
        Sub::Surface(f) => f.into_config(Command::Surface, None)?,
        Sub::Demo { name, flags } => flags.into_config(Command::Demo, Some(name))?,
    };
    commands::run(&cfg)
}
