//! One module per pipeline. Each returns a one-line summary for stdout and
//! leaves its files in the [`Artifacts`] directory.

mod forward;
mod identify;
mod recover;
mod surface;

use serde_json::Value;

use crate::artifacts::Artifacts;
use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::inputs;
use invot_core::{CostSpec, LocationScaleFamily, Measure1D};

/// Validates, runs and records one configuration.
pub fn run(cfg: &RunConfig) -> CliResult<Value> {
    cfg.validate()?;
    let mut art = Artifacts::create(cfg.out_dir(), cfg.hash()?)?;
    art.log(&format!("command {}", cfg.command.name()));
    let summary = match cfg.command {
        Command::Forward => forward::forward(cfg, &mut art),
        Command::Potentials => forward::potentials(cfg, &mut art),
        Command::RecoverMap => recover::recover_map(cfg, &mut art),
        Command::RecoverConcave => recover::recover_concave(cfg, &mut art),
        Command::RecoverValues => recover::recover_values(cfg, &mut art),
        Command::Identify => identify::identify(cfg, &mut art),
        Command::Demo => identify::demo(cfg, &mut art),
        Command::Surface => surface::surface(cfg, &mut art),
    };
    let summary = match summary {
        Ok(s) => s,
        Err(e) => {
            art.abort(&e.to_json())?;
            return Err(e);
        }
    };
    art.finish(cfg.command.name(), cfg.canonical()?)?;
    Ok(summary)
}

fn costs(cfg: &RunConfig) -> CliResult<Vec<CostSpec>> {
    cfg.costs
        .iter()
        .enumerate()
        .map(|(i, c)| inputs::build_cost(c, &format!("costs[{i}]")))
        .collect()
}

fn single_cost(cfg: &RunConfig) -> CliResult<CostSpec> {
    costs(cfg)?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::config("MissingInput", "a cost is required"))
}

fn pair(cfg: &RunConfig) -> CliResult<(Measure1D, Measure1D)> {
    let get = |m: &Option<Value>, key: &str| match m {
        Some(doc) => inputs::build_measure(doc, key, cfg.grid_n),
        None => Err(CliError::config("MissingInput", format!("{key} is required"))),
    };
    Ok((get(&cfg.mu, "mu")?, get(&cfg.nu, "nu")?))
}

fn family(cfg: &RunConfig) -> CliResult<LocationScaleFamily> {
    match &cfg.family {
        Some(doc) => inputs::build_family(doc, "family"),
        None => Err(CliError::config("MissingInput", "a family is required")),
    }
}

/// Relative error, falling back to absolute error near zero.
fn relative(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}
