use std::path::Path;

use serde_json::{json, Value};

use invot_core::forward::{concave_ot_1d, monotone_map, ot_cost_quantile, potential_derivative_1d};
use invot_core::numeric::grid::trapezoid;
use invot_core::recovery::{
    assemble_convex_cost, conjugate_graph_from_map, recover_concave as recover_concave_graph,
    recover_from_values_locscale, ConjugateGraph, GraphKind, RecoveredCost, ValueAnchor, ValueMethod,
    MONOTONE_TOL, ORIGIN_REACH,
};
use invot_core::transforms::{GTransformSamples, SpectralRegularization};
use invot_core::{CostKind, CostSpec, GridFunction};

use super::{family, pair, relative, single_cost};
use crate::artifacts::{grid_json, grid_rows, Artifacts};
use crate::config::{Method, RunConfig};
use crate::error::{CliError, CliResult, Context};
use crate::inputs;

/// Fraction trimmed from each end of the identified domain when comparing
/// against a known cost.
const EDGE_TRIM: f64 = 0.1;
/// Range over which value recoveries are scored against a known cost.
const SCORE_RANGE: (f64, f64) = (-3.0, 3.0);
const DEFAULT_POST_POINTS: [f64; 3] = [0.5, 1.0, 2.0];

fn report(r: &RecoveredCost) -> Value {
    json!({
        "identified_domain": [r.identified_domain.0, r.identified_domain.1],
        "k": r.k,
        "k_method": r.k_method.name(),
        "hprime": grid_json(&r.hprime),
        "h": grid_json(&r.h),
        "diagnostics": {
            "isotonic_projection_distance": r.diagnostics.isotonic_projection_distance,
            "anchor_residual": r.diagnostics.anchor_residual,
            "merged_spread": r.diagnostics.merged_spread,
        },
    })
}

fn write_recovered(art: &mut Artifacts, r: &RecoveredCost, graph: &ConjugateGraph) -> CliResult<()> {
    let graph_rows: Vec<Vec<f64>> = graph.points.iter().map(|&(y, z)| vec![y, z]).collect();
    art.csv("graph.csv", &[], &["y", "z"], &graph_rows)?;
    art.csv("hprime.csv", &[], &["x", "hprime"], &grid_rows(&r.hprime))?;
    art.csv("h.csv", &[], &["x", "h"], &grid_rows(&r.h))
}

/// Largest deviation of `got` from `want` over the interior of its domain.
fn interior_max_error(got: &GridFunction, want: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = got.domain();
    let (lo, hi) = (lo + EDGE_TRIM * (hi - lo), hi - EDGE_TRIM * (hi - lo));
    got.x()
        .iter()
        .zip(got.y())
        .filter(|(&x, _)| x >= lo && x <= hi)
        .map(|(&x, &v)| (v - want(x)).abs())
        .fold(0.0, f64::max)
}

/// `x,t,fprime` rows of an observations file.
fn read_observations(path: &str) -> CliResult<(GridFunction, GridFunction)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let (mut x, mut t, mut d) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.deserialize::<(f64, f64, f64)>() {
        let (xi, ti, di) = record.map_err(|e| csv_error(path, e))?;
        x.push(xi);
        t.push(ti);
        d.push(di);
    }
    let map = GridFunction::new(x.clone(), t).op("read observations")?;
    let fprime = GridFunction::new(x, d).op("read observations")?;
    Ok((map, fprime))
}

fn csv_error(path: &str, e: csv::Error) -> CliError {
    match e.position() {
        Some(pos) => CliError::Parse {
            line: pos.line() as usize,
            column: 1,
            message: format!("{path}: {e}"),
        },
        None => CliError::config("CsvError", format!("{path}: {e}")),
    }
}

pub fn recover_map(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let cost = if cfg.costs.is_empty() { None } else { Some(single_cost(cfg)?) };
    if cost.as_ref().is_some_and(|c| c.kind() != CostKind::Convex) {
        return Err(CliError::config("InvalidInput", "recover-map needs a convex cost; see recover-concave"));
    }
    let (map, fprime, measures) = match (&cfg.observations, &cost) {
        (Some(path), _) => {
            let (map, fprime) = read_observations(path)?;
            (map, fprime, None)
        }
        (None, Some(cost)) => {
            let (mu, nu) = pair(cfg)?;
            let map = monotone_map(&mu, &nu).op("monotone_map")?;
            let fprime = potential_derivative_1d(cost, &mu, &nu).op("potential_derivative_1d")?;
            (map, fprime, Some((mu, nu)))
        }
        (None, None) => return Err(CliError::config("MissingInput", "recover-map needs a cost or observations")),
    };
    let graph = conjugate_graph_from_map(&map, &fprime, GraphKind::Convex).op("conjugate_graph_from_map")?;
    let anchor = match (cfg.anchor, &cost, &measures) {
        (true, Some(cost), Some((mu, nu))) => Some(ValueAnchor {
            mu: mu.clone(),
            nu: nu.clone(),
            alpha: ot_cost_quantile(cost, mu, nu).op("ot_cost_quantile")?,
        }),
        (true, _, _) => {
            return Err(CliError::config("MissingInput", "a value anchor needs a cost with mu and nu"));
        }
        _ => None,
    };
    let r = assemble_convex_cost(&graph, anchor.as_ref()).op("assemble_convex_cost")?;
    art.tolerances("recovery", json!({"monotone_tol": MONOTONE_TOL, "duplicate_tol": 1e-10}));

    let mut out = report(&r);
    if let Some(cost) = &cost {
        out["reference"] = json!({
            "cost": cost.label(),
            "interior_fraction": 1.0 - 2.0 * EDGE_TRIM,
            "hprime_max_abs_error": interior_max_error(&r.hprime, |x| cost.derivative(x)),
        });
    }
    write_recovered(art, &r, &graph)?;
    art.json("recovery.json", out)?;
    Ok(json!({"k": r.k, "k_method": r.k_method.name(), "identified_domain": [r.identified_domain.0, r.identified_domain.1]}))
}

pub fn recover_concave(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let cost = single_cost(cfg)?;
    if cost.kind() != CostKind::Concave {
        return Err(CliError::config("InvalidInput", "recover-concave needs a concave cost"));
    }
    let (mu, nu) = pair(cfg)?;
    let n = cfg.lp_n();
    let ot = concave_ot_1d(&cost, &mu, &nu, n).op("concave_ot_1d")?;
    let (Some(map), Some(fprime)) = (ot.leftover_map(), ot.leftover_fprime(&cost)) else {
        return Err(CliError::Numerical {
            operation: "concave_ot_1d",
            source: invot_core::Error::DegenerateGraph("the measures coincide; nothing is transported".into()),
        });
    };
    let points = map
        .x()
        .iter()
        .zip(map.y())
        .zip(fprime.y())
        .map(|((&x, &t), &y)| (y, x - t))
        .collect();
    let graph = ConjugateGraph::new(GraphKind::Concave, points).op("conjugate graph")?;
    let r = recover_concave_graph(&graph).op("recover_concave")?;
    art.tolerances(
        "recovery",
        json!({"lp_n": n, "origin_reach": ORIGIN_REACH, "sign_tol": 1e-8}),
    );

    let worst = graph
        .points
        .iter()
        .map(|&(y, z)| relative(z.abs(), cost.conjugate_gradient(y.abs())))
        .fold(0.0, f64::max);
    let mut out = report(&r);
    out["separated"] = json!(ot.separated);
    out["reference"] = json!({
        "cost": cost.label(),
        "inverse_derivative_max_relative_error": worst,
    });
    write_recovered(art, &r, &graph)?;
    art.json("recovery.json", out)?;
    Ok(json!({"k_method": r.k_method.name(), "inverse_derivative_max_relative_error": worst}))
}

/// A value surface file: `a,b,alpha` rows, with optional `# cost:` and
/// `# family:` comment lines naming what generated it.
pub struct SurfaceFile {
    pub entries: Vec<(f64, f64, f64)>,
    pub cost: Option<Value>,
    pub family: Option<Value>,
}

pub fn read_surface(path: &str) -> CliResult<SurfaceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(Path::new(path), e))?;
    let mut cost = None;
    let mut family = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(doc) = body.strip_prefix("cost:") {
            cost = Some(serde_json::from_str(doc.trim())?);
        } else if let Some(doc) = body.strip_prefix("family:") {
            family = Some(serde_json::from_str(doc.trim())?);
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for record in reader.deserialize::<(f64, f64, f64)>() {
        entries.push(record.map_err(|e| csv_error(path, e))?);
    }
    Ok(SurfaceFile { entries, cost, family })
}

fn single_b(entries: &[(f64, f64, f64)]) -> CliResult<f64> {
    let mut bs: Vec<f64> = entries.iter().map(|e| e.1).collect();
    bs.sort_by(f64::total_cmp);
    bs.dedup();
    match bs.as_slice() {
        [b] => Ok(*b),
        _ => Err(CliError::config(
            "MissingInput",
            format!("surface holds {} scales; choose one with --b", bs.len()),
        )),
    }
}

fn relative_l2(h: &GridFunction, truth: &CostSpec) -> f64 {
    let (lo, hi) = SCORE_RANGE;
    let (mut x, mut err, mut norm) = (Vec::new(), Vec::new(), Vec::new());
    for (&xi, &hi_val) in h.x().iter().zip(h.y()) {
        if xi >= lo && xi <= hi {
            let want = truth.value(xi);
            x.push(xi);
            err.push((hi_val - want).powi(2));
            norm.push(want * want);
        }
    }
    (trapezoid(&x, &err) / trapezoid(&x, &norm)).sqrt()
}

pub fn recover_values(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let path = cfg.surface.as_deref().expect("validated");
    let surface = read_surface(path)?;
    let family = family(cfg)?;
    let samples = GTransformSamples::new(family.clone(), surface.entries.clone()).op("read surface")?;
    let method = match cfg.method.expect("validated") {
        Method::Fourier => {
            let b = match cfg.b {
                Some(b) => b,
                None => single_b(&surface.entries)?,
            };
            let a = samples.slice_at_b(b).op("slice surface")?.x().to_vec();
            let reg = SpectralRegularization {
                eps: cfg.reg_eps,
                poly_degree: cfg.poly_degree,
                ..SpectralRegularization::default()
            };
            art.tolerances(
                "deconvolution",
                json!({"b": b, "eps": reg.eps, "padding": reg.padding, "taper": format!("{:?}", reg.taper), "poly_degree": reg.poly_degree}),
            );
            ValueMethod::Fourier { b, a, reg }
        }
        Method::Post => {
            let x = cfg.x.clone().unwrap_or_else(|| DEFAULT_POST_POINTS.to_vec());
            art.tolerances(
                "post",
                json!({"order": cfg.post_order, "check_order": cfg.post_order + 2, "stability_ratio": 0.5}),
            );
            ValueMethod::Post { x, order: cfg.post_order }
        }
    };
    let rec = recover_from_values_locscale(&samples, &family, &method).op("recover_from_values_locscale")?;

    let mut out = json!({
        "method": method.name(),
        "family": family.name(),
        "h": grid_json(&rec.h),
        "notes": rec.notes,
    });
    if let Some(dec) = &rec.deconvolution {
        out["deconvolution"] = json!({
            "clamped_fraction": dec.clamped_fraction,
            "min_band_spectrum": dec.min_band_spectrum,
            "polynomial": dec.polynomial,
        });
    }
    if !rec.post.is_empty() {
        out["post"] = rec
            .post
            .iter()
            .map(|p| json!({"x": p.x, "value": p.value, "check": p.check}))
            .collect();
    }
    let mut summary = json!({"method": method.name(), "points": rec.h.len()});
    if let Some(doc) = &surface.cost {
        let truth = inputs::build_cost(doc, "surface cost")?;
        let mut reference = json!({"cost": truth.label()});
        match &method {
            ValueMethod::Fourier { .. } => {
                let e = relative_l2(&rec.h, &truth);
                reference["l2_range"] = json!([SCORE_RANGE.0, SCORE_RANGE.1]);
                reference["l2_error"] = json!(e);
                summary["l2_error"] = json!(e);
            }
            ValueMethod::Post { .. } => {
                let e = rec
                    .post
                    .iter()
                    .map(|p| relative(p.value, truth.value(p.x)))
                    .fold(0.0, f64::max);
                reference["max_relative_error"] = json!(e);
                summary["max_relative_error"] = json!(e);
            }
        }
        out["reference"] = reference;
    }
    if surface.family.as_ref().is_some_and(|f| f != cfg.family.as_ref().expect("validated")) {
        out["warnings"] = json!(["surface was generated under a different family"]);
    }
    art.csv("h.csv", &[], &["x", "h"], &grid_rows(&rec.h))?;
    art.json("recovery.json", out)?;
    Ok(summary)
}
