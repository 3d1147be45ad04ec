use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};

use invot_core::numeric::grid::linspace;
use invot_core::transforms::{alpha_locscale, post_stencil};

use super::{family, single_cost};
use crate::artifacts::Artifacts;
use crate::config::{Method, RunConfig};
use crate::error::{CliError, CliResult, Context};

const DEFAULT_B: f64 = 2.0;
const DEFAULT_A_RANGE: [f64; 2] = [-8.0, 8.0];
const DEFAULT_A_N: usize = 161;

/// Parameter points a recovery method will ask for.
fn parameters(cfg: &RunConfig) -> Vec<(f64, f64)> {
    match cfg.method.expect("validated") {
        Method::Fourier => {
            let b = cfg.b.unwrap_or(DEFAULT_B);
            let [lo, hi] = cfg.a_range.unwrap_or(DEFAULT_A_RANGE);
            linspace(lo, hi, cfg.a_n.unwrap_or(DEFAULT_A_N))
                .into_iter()
                .map(|a| (a, b))
                .collect()
        }
        Method::Post => {
            // The a = 0 section at b = 1 + 1/s, for every rate s of the stencil.
            let xs = cfg.x.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
            let mut params: Vec<(f64, f64)> = Vec::new();
            for x in xs {
                for s in post_stencil(x, cfg.post_order) {
                    let p = (0.0, 1.0 + 1.0 / s);
                    if !params.contains(&p) {
                        params.push(p);
                    }
                }
            }
            params
        }
    }
}

pub fn surface(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let cost = single_cost(cfg)?;
    let family = family(cfg)?;
    let params = parameters(cfg);
    let noise = if cfg.noise > 0.0 {
        Some(Normal::new(0.0, cfg.noise).map_err(|e| CliError::config("OutOfRange", format!("noise: {e}")))?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(params.len());
    for &(a, b) in &params {
        let mut alpha = alpha_locscale(|t| cost.value(t), &family, a, b).op("alpha_locscale")?;
        if let Some(n) = &noise {
            alpha += n.sample(&mut rng);
        }
        rows.push(vec![a, b, alpha]);
    }
    art.tolerances("quantile", json!({"rel_tol": 1e-10, "noise": cfg.noise, "seed": cfg.seed}));
    let comments = vec![
        format!("cost: {}", cfg.costs[0]),
        format!("family: {}", cfg.family.as_ref().expect("validated")),
        format!("method: {}", serde_json::to_value(cfg.method).expect("serializes").as_str().unwrap_or("")),
    ];
    art.csv("surface.csv", &comments, &["a", "b", "alpha"], &rows)?;
    Ok(json!({"points": rows.len(), "file": "surface.csv"}))
}
