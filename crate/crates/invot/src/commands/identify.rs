use serde_json::{json, Value};

use invot_core::identify::{
    assemble_value_report, default_lattice, plans_only_nonidentifiability, refine_gap, value_gap,
    IdentifiabilityReport, PlansReport,
};
use invot_core::{CostSpec, LocationScaleFamily, Measure1D};

use super::{costs, family, pair};
use crate::artifacts::Artifacts;
use crate::config::RunConfig;
use crate::error::{CliResult, Context};

/// Gaps on every lattice point. Work is split across `jobs` threads in
/// contiguous blocks and reassembled in lattice order.
fn lattice_gaps(
    c1: &CostSpec,
    c2: &CostSpec,
    family: &LocationScaleFamily,
    params: &[(f64, f64)],
    jobs: usize,
) -> CliResult<Vec<f64>> {
    let block = params.len().div_ceil(jobs.max(1)).max(1);
    let results: Vec<invot_core::Result<Vec<f64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = params
            .chunks(block)
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|&(a, b)| value_gap(c1, c2, family, a, b))
                        .collect::<invot_core::Result<Vec<f64>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("gap worker panicked")).collect()
    });
    let mut gaps = Vec::with_capacity(params.len());
    for r in results {
        gaps.extend(r.op("value_gap")?);
    }
    Ok(gaps)
}

fn report_json(labels: [String; 2], r: &IdentifiabilityReport) -> Value {
    json!({
        "costs": labels,
        "distinguishable": r.distinguishable,
        "witness": r.witness.map(|(a, b)| [a, b]),
        "max_value_gap": r.max_value_gap,
        "refined": r.refined.as_ref().map(|f| json!({"a": f.a, "b": f.b, "gap": f.gap})),
        "plans_agree": r.plans_agree,
        "certificates": r.certificates,
        "notes": r.notes,
    })
}

fn plans_json(p: &PlansReport) -> Value {
    json!({
        "plans_agree": p.plans_agree,
        "max_value_gap": p.max_value_gap,
        "certificates": p.certificates,
        "instances": p.instances.iter().map(|i| json!({
            "cost": i.label,
            "lp_value": i.lp.coupling.value,
            "quantile_value": i.quantile_value,
            "duality_gap": i.lp.duality_gap,
            "max_dual_violation": i.lp.max_dual_violation,
            "monotone": i.monotone,
        })).collect::<Vec<_>>(),
    })
}

pub fn identify(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let costs = costs(cfg)?;
    let family = family(cfg)?;
    let params = default_lattice();
    let plans = if cfg.mu.is_some() {
        let (mu, nu) = pair(cfg)?;
        Some(plans_only_nonidentifiability(&costs, &mu, &nu, cfg.lp_n()).op("plans_only_nonidentifiability")?)
    } else {
        None
    };
    art.tolerances("identify", json!({"tol": cfg.tol, "lattice": "9x9 over [-2,2]x[1.1,3]", "refine_iterations": 40}));

    let mut comparisons = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (k, other) in costs.iter().enumerate().skip(1) {
        let gaps = lattice_gaps(&costs[0], other, &family, &params, cfg.jobs)?;
        let mut report = assemble_value_report(&params, &gaps, cfg.tol);
        report.refined = refine_gap(&costs[0], other, &family, &params, &gaps);
        if let Some(p) = &plans {
            report.plans_agree = Some(p.plans_agree);
            report.certificates = vec![p.certificates[0], p.certificates[k]];
        }
        art.log(&format!("compared {} with {}", costs[0].label(), other.label()));
        comparisons.push(report_json([costs[0].label(), other.label()], &report));
        columns.push(gaps);
    }
    let rows: Vec<Vec<f64>> = params
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let mut row = vec![a, b];
            row.extend(columns.iter().map(|c| c[i]));
            row
        })
        .collect();
    let names: Vec<String> = (1..costs.len()).map(|k| format!("gap_0_{k}")).collect();
    let mut header = vec!["a", "b"];
    header.extend(names.iter().map(String::as_str));
    art.csv("gaps.csv", &[], &header, &rows)?;

    let distinguishable: Vec<bool> = comparisons
        .iter()
        .map(|c| c["distinguishable"].as_bool().unwrap_or(false))
        .collect();
    let mut out = json!({
        "family": family.name(),
        "tol": cfg.tol,
        "lattice_points": params.len(),
        "comparisons": comparisons,
    });
    if let Some(p) = &plans {
        out["plans"] = plans_json(p);
    }
    art.json("identify.json", out)?;
    Ok(json!({"distinguishable": distinguishable}))
}

/// Costs `x^2` and `x^4` between `U[0, 1]` and `U[2, 3]` share the monotone
/// plan while their values differ: plans alone cannot identify the cost.
pub fn demo(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let costs = if cfg.costs.is_empty() {
        vec![
            CostSpec::convex_power(2.0).op("demo cost")?,
            CostSpec::convex_power(4.0).op("demo cost")?,
        ]
    } else {
        costs(cfg)?
    };
    let (mu, nu) = match (&cfg.mu, &cfg.nu) {
        (Some(_), Some(_)) => pair(cfg)?,
        _ => (
            Measure1D::uniform(0.0, 1.0, cfg.grid_n).op("demo measure")?,
            Measure1D::uniform(2.0, 3.0, cfg.grid_n).op("demo measure")?,
        ),
    };
    let n = cfg.lp_n();
    let report = plans_only_nonidentifiability(&costs, &mu, &nu, n).op("plans_only_nonidentifiability")?;
    art.tolerances("lp", json!({"n": n, "plan_agreement": 1e-12}));

    let lp = &report.instances[0].lp.coupling;
    let rows: Vec<Vec<f64>> = lp
        .support()
        .into_iter()
        .map(|(i, j, m)| vec![i as f64, j as f64, lp.rows.atoms()[i], lp.cols.atoms()[j], m])
        .collect();
    art.csv("plan.csv", &[], &["i", "j", "x", "y", "mass"], &rows)?;

    let mut out = plans_json(&report);
    out["demo"] = json!("plans-nonidentifiability");
    out["n"] = json!(n);
    out["conclusion"] = json!(if report.plans_agree && report.max_value_gap > 0.0 {
        "one plan is optimal for every candidate cost while the values differ: the plan does not identify the cost"
    } else {
        "the candidate costs are separated by their plans"
    });
    art.json("demo.json", out)?;
    Ok(json!({"plans_agree": report.plans_agree, "max_value_gap": report.max_value_gap}))
}
