//! The resolved run configuration, its hash and its invariant checks.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::inputs::{self, Diagnostic, Diagnostics};

/// Largest supported LP side; `n x n` must stay under the solver's cell cap.
pub const MAX_LP_N: usize = 1000;
pub const MAX_GRID_N: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Forward,
    Potentials,
    RecoverMap,
    RecoverValues,
    RecoverConcave,
    Identify,
    Demo,
    Surface,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Potentials => "potentials",
            Command::RecoverMap => "recover-map",
            Command::RecoverValues => "recover-values",
            Command::RecoverConcave => "recover-concave",
            Command::Identify => "identify",
            Command::Demo => "demo",
            Command::Surface => "surface",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fourier,
    Post,
}

/// Every knob of a run. Shorthand arguments are already expanded to their
/// JSON form, so this is the single source of truth for hashing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub costs: Vec<Value>,
    #[serde(default)]
    pub mu: Option<Value>,
    #[serde(default)]
    pub nu: Option<Value>,
    #[serde(default)]
    pub family: Option<Value>,
    /// Value-surface CSV for `recover-values`.
    #[serde(default)]
    pub surface: Option<String>,
    /// `x,t,fprime` CSV of observed maps for `recover-map`.
    #[serde(default)]
    pub observations: Option<String>,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default = "default_reg_eps")]
    pub reg_eps: f64,
    #[serde(default)]
    pub poly_degree: Option<usize>,
    #[serde(default = "default_post_order")]
    pub post_order: usize,
    /// Fixed scale of a Fourier slice.
    #[serde(default)]
    pub b: Option<f64>,
    /// Evaluation points of a Post inversion.
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    /// `a`-range and count of a generated Fourier surface.
    #[serde(default)]
    pub a_range: Option<[f64; 2]>,
    #[serde(default)]
    pub a_n: Option<usize>,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub lp_n: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Match the recovered cost to the true OT value of `(mu, nu)`.
    #[serde(default)]
    pub anchor: bool,
    #[serde(default)]
    pub demo: Option<String>,
    /// Standard deviation of Gaussian noise added to generated surfaces.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_reg_eps() -> f64 {
    1e-3
}
fn default_post_order() -> usize {
    10
}
fn default_grid_n() -> usize {
    invot_core::measures::DEFAULT_GRID_POINTS
}
fn default_tol() -> f64 {
    1e-8
}
fn default_jobs() -> usize {
    1
}

pub const DEMOS: &[&str] = &["plans-nonidentifiability"];

impl RunConfig {
    pub fn new(command: Command) -> Self {
        serde_json::from_value(serde_json::json!({ "command": command })).expect("defaults deserialize")
    }

    /// Reads a configuration file; syntax errors carry line and column.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: Value = serde_json::from_str(&text)?;
        serde_json::from_value(value).map_err(|e| CliError::config("SchemaError", e.to_string()))
    }

    /// Output directory: `INVOT_OUT`, then `--out`, then `invot-out`.
    pub fn out_dir(&self) -> String {
        std::env::var("INVOT_OUT")
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| self.out.clone())
            .unwrap_or_else(|| "invot-out".into())
    }

    pub fn lp_n(&self) -> usize {
        self.lp_n.unwrap_or(match self.command {
            Command::Demo | Command::Identify => 50,
            Command::RecoverConcave => 100,
            _ => 200,
        })
    }

    /// The hashed form: every knob except where results go and how many
    /// threads compute them, plus the digest of any referenced data file.
    pub fn canonical(&self) -> CliResult<Value> {
        let mut value = serde_json::to_value(self).expect("config serializes");
        let obj = value.as_object_mut().expect("config is an object");
        obj.remove("out");
        obj.remove("jobs");
        for key in ["surface", "observations"] {
            if let Some(path) = obj.get(key).and_then(Value::as_str).map(str::to_owned) {
                let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
                obj.insert(format!("{key}_sha256"), Value::String(hex::encode(Sha256::digest(&bytes))));
            }
        }
        Ok(value)
    }

    pub fn hash(&self) -> CliResult<String> {
        let canonical = self.canonical()?;
        Ok(hex::encode(Sha256::digest(canonical.to_string().as_bytes())))
    }

    /// Every violated invariant; empty means the configuration can run.
    pub fn diagnostics(&self) -> Diagnostics {
        let mut d = Vec::new();
        let range = |d: &mut Diagnostics, ok: bool, path: &str, msg: String| {
            if !ok {
                d.push(Diagnostic::new("OutOfRange", path, msg));
            }
        };
        range(
            &mut d,
            (16..=MAX_GRID_N).contains(&self.grid_n),
            "grid_n",
            format!("{} not in [16, {MAX_GRID_N}]", self.grid_n),
        );
        if let Some(n) = self.lp_n {
            range(&mut d, (2..=MAX_LP_N).contains(&n), "lp_n", format!("{n} not in [2, {MAX_LP_N}]"));
        }
        range(
            &mut d,
            self.reg_eps > 0.0 && self.reg_eps < 1.0,
            "reg_eps",
            format!("{} not in (0, 1)", self.reg_eps),
        );
        range(
            &mut d,
            (2..=30).contains(&self.post_order),
            "post_order",
            format!("{} not in [2, 30]", self.post_order),
        );
        range(&mut d, self.tol > 0.0, "tol", format!("{} must be positive", self.tol));
        range(&mut d, self.jobs >= 1, "jobs", "must be at least 1".into());
        range(&mut d, self.noise >= 0.0, "noise", format!("{} must be non-negative", self.noise));
        if let Some(k) = self.poly_degree {
            range(&mut d, k <= 4, "poly_degree", format!("{k} above 4"));
        }
        if let Some(b) = self.b {
            if b <= 0.0 {
                d.push(Diagnostic::new("NonPositiveScale", "b", format!("scale must be positive, got {b}")));
            } else if b == 1.0 {
                d.push(Diagnostic::new("OutOfRange", "b", "b = 1 carries no kernel"));
            }
        }
        if let Some(xs) = &self.x {
            if xs.is_empty() || xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                d.push(Diagnostic::new("OutOfRange", "x", "evaluation points must be positive"));
            }
        }
        if let Some([lo, hi]) = self.a_range {
            if !(lo < hi) {
                d.push(Diagnostic::new("OutOfRange", "a_range", format!("[{lo}, {hi}] is empty")));
            }
        }
        if let Some(n) = self.a_n {
            if n < 4 {
                d.push(Diagnostic::new("OutOfRange", "a_n", format!("{n} below 4")));
            }
        }

        for (i, cost) in self.costs.iter().enumerate() {
            d.extend(inputs::check_cost(cost, &format!("costs[{i}]")));
        }
        for (key, m) in [("mu", &self.mu), ("nu", &self.nu)] {
            if let Some(m) = m {
                d.extend(inputs::check_measure(m, key, self.grid_n));
            }
        }
        if let Some(f) = &self.family {
            d.extend(inputs::check_family(f, "family"));
        }
        for (key, path) in [("surface", &self.surface), ("observations", &self.observations)] {
            if let Some(p) = path {
                if !Path::new(p).is_file() {
                    d.push(Diagnostic::new("MissingFile", key, format!("{p} is not a readable file")));
                }
            }
        }

        let command = self.command.name();
        let need = |d: &mut Diagnostics, ok: bool, path: &str, msg: &str| {
            if !ok {
                d.push(Diagnostic::new("MissingInput", path, format!("{command} needs {msg}")));
            }
        };
        let pair = self.mu.is_some() && self.nu.is_some();
        match self.command {
            Command::Forward | Command::Potentials | Command::RecoverConcave => {
                need(&mut d, self.costs.len() == 1, "costs", "exactly one cost");
                need(&mut d, pair, "mu", "both mu and nu");
            }
            Command::RecoverMap => {
                if self.observations.is_none() {
                    need(&mut d, self.costs.len() == 1, "costs", "one cost or an observations file");
                    need(&mut d, pair, "mu", "both mu and nu");
                }
                if self.anchor {
                    need(&mut d, self.costs.len() == 1 && pair, "anchor", "a cost, mu and nu for a value anchor");
                }
            }
            Command::RecoverValues => {
                need(&mut d, self.surface.is_some(), "surface", "a value surface");
                need(&mut d, self.family.is_some(), "family", "a family");
                need(&mut d, self.method.is_some(), "method", "a method");
            }
            Command::Surface => {
                need(&mut d, self.costs.len() == 1, "costs", "exactly one cost");
                need(&mut d, self.family.is_some(), "family", "a family");
                need(&mut d, self.method.is_some(), "method", "a method");
            }
            Command::Identify => {
                need(&mut d, self.costs.len() >= 2, "costs", "at least two costs");
                need(&mut d, self.family.is_some(), "family", "a family");
                need(&mut d, self.mu.is_some() == self.nu.is_some(), "mu", "mu and nu together");
            }
            Command::Demo => match &self.demo {
                Some(name) if DEMOS.contains(&name.as_str()) => {}
                Some(name) => d.push(Diagnostic::new(
                    "OutOfRange",
                    "demo",
                    format!("unknown demo {name:?}; available: {}", DEMOS.join(", ")),
                )),
                None => d.push(Diagnostic::new("MissingInput", "demo", "demo needs a name")),
            },
        }
        d
    }

    pub fn validate(&self) -> CliResult<()> {
        match self.diagnostics().into_iter().next() {
            Some(d) => Err(CliError::config(d.code, format!("{}: {}", d.path, d.message))),
            None => Ok(()),
        }
    }
}
