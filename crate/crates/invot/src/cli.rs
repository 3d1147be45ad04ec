//! Command-line flags, turned into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Command, Method, RunConfig};
use crate::error::{CliError, CliResult};
use crate::inputs;

#[derive(Debug, Parser)]
#[command(name = "invot", version, about = "Forward and inverse optimal transport on the real line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// OT value, monotone map, plan and potentials for one cost.
    Forward(Flags),
    /// Dual potentials with a feasibility and duality certificate.
    Potentials(Flags),
    /// Recover h' and h from maps and potential gradients.
    RecoverMap(Flags),
    /// Recover h from a surface of OT values over a location-scale family.
    RecoverValues(Flags),
    /// Recover (l')^{-1} and l for a concave cost of the distance.
    RecoverConcave(Flags),
    /// Compare candidate costs on a lattice of family members.
    Identify(Flags),
    /// Canned demonstrations.
    Demo {
        name: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Generate a value surface CSV from a known cost.
    Surface(Flags),
    /// List every violated invariant of a configuration file without running.
    Validate { config: PathBuf },
    /// Run a configuration file.
    Run { config: PathBuf },
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// Cost: `power:p`, `concave:p`, optional `+k`, JSON, or a JSON file.
    /// Repeat for identify.
    #[arg(long = "cost")]
    pub costs: Vec<String>,
    /// Source measure: `normal:a,b`, `uniform:lo,hi`, ..., JSON, or a JSON file.
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub nu: Option<String>,
    /// Location-scale family name, or a JSON generator `{"grid", "density"}`.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub surface: Option<String>,
    /// CSV with columns x,t,fprime of observed maps.
    #[arg(long)]
    pub observations: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub reg_eps: Option<f64>,
    /// Degree of the polynomial part removed before deconvolution (at most 4).
    #[arg(long)]
    pub poly_degree: Option<usize>,
    #[arg(long)]
    pub post_order: Option<usize>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Comma-separated Post evaluation points.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    /// `lo,hi` of a generated Fourier surface.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a_range: Option<Vec<f64>>,
    #[arg(long)]
    pub a_n: Option<usize>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub lp_n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Match the recovered cost to the OT value of (mu, nu).
    #[arg(long)]
    pub anchor: bool,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Flags {
    pub fn into_config(self, command: Command, demo: Option<String>) -> CliResult<RunConfig> {
        let mut c = RunConfig::new(command);
        c.costs = self
            .costs
            .iter()
            .map(|s| inputs::canonical_cost(s))
            .collect::<CliResult<_>>()?;
        c.mu = self.mu.as_deref().map(inputs::canonical_measure).transpose()?;
        c.nu = self.nu.as_deref().map(inputs::canonical_measure).transpose()?;
        c.family = self.family.as_deref().map(inputs::canonical_family).transpose()?;
        c.surface = self.surface;
        c.observations = self.observations;
        c.method = self.method;
        if let Some(v) = self.reg_eps {
            c.reg_eps = v;
        }
        c.poly_degree = self.poly_degree;
        if let Some(v) = self.post_order {
            c.post_order = v;
        }
        c.b = self.b;
        c.x = self.x;
        c.a_range = match self.a_range.as_deref() {
            None => None,
            Some(&[lo, hi]) => Some([lo, hi]),
            Some(_) => return Err(CliError::config("InvalidShorthand", "--a-range takes lo,hi")),
        };
        c.a_n = self.a_n;
        if let Some(v) = self.grid_n {
            c.grid_n = v;
        }
        c.lp_n = self.lp_n;
        if let Some(v) = self.tol {
            c.tol = v;
        }
        c.anchor = self.anchor;
        if let Some(v) = self.noise {
            c.noise = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.out = self.out;
        if let Some(v) = self.jobs {
            c.jobs = v;
        }
        c.demo = demo;
        Ok(c)
    }
}
