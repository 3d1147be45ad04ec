use serde_json::{json, Value};

use invot_core::forward::{
    concave_ot_1d, monotone_map, ot_cost_quantile, ot_lp, potentials_1d, LpSolution, Potentials1D,
};
use invot_core::measures::discretize;
use invot_core::numeric::quadrature::UnitIntervalRule;
use invot_core::{CostKind, CostSpec, Measure1D};

use super::{pair, relative, single_cost};
use crate::artifacts::{grid_rows, Artifacts};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};

/// Feasibility slack accepted in potential certificates.
const FEASIBILITY_TOL: f64 = 1e-8;
/// Relative duality gap accepted in potential certificates.
const DUALITY_TOL: f64 = 1e-3;

fn quadrature_tolerances() -> Value {
    let rule = UnitIntervalRule::default();
    json!({
        "nodes_per_panel": rule.nodes_per_panel,
        "panels": rule.panels,
        "endpoint_strip": rule.endpoint_strip,
        "rel_tol": rule.rel_tol,
    })
}

fn write_plan(art: &mut Artifacts, lp: &LpSolution) -> CliResult<()> {
    let c = &lp.coupling;
    let rows: Vec<Vec<f64>> = c
        .support()
        .into_iter()
        .map(|(i, j, m)| vec![i as f64, j as f64, c.rows.atoms()[i], c.cols.atoms()[j], m])
        .collect();
    art.csv("plan.csv", &[], &["i", "j", "x", "y", "mass"], &rows)
}

fn lp_report(lp: &LpSolution, n: usize) -> Value {
    json!({
        "n": n,
        "value": lp.coupling.value,
        "dual_value": lp.dual_value,
        "duality_gap": lp.duality_gap,
        "max_dual_violation": lp.max_dual_violation,
        "marginal_error": lp.coupling.marginal_error(),
        "pivots": lp.pivots,
    })
}

fn lp_oracle(cost: &CostSpec, mu: &Measure1D, nu: &Measure1D, n: usize) -> CliResult<LpSolution> {
    let rows = discretize(mu, n).op("discretize")?;
    let cols = discretize(nu, n).op("discretize")?;
    ot_lp(&rows, &cols, cost).op("ot_lp")
}

fn write_potentials(art: &mut Artifacts, pot: &Potentials1D) -> CliResult<()> {
    let f_rows: Vec<Vec<f64>> = pot
        .f
        .x()
        .iter()
        .zip(pot.f.y())
        .zip(pot.fprime.y())
        .map(|((&x, &f), &d)| vec![x, f, d])
        .collect();
    art.csv("potentials_f.csv", &[], &["x", "f", "fprime"], &f_rows)?;
    art.csv("potentials_g.csv", &[], &["y", "g"], &grid_rows(&pot.g))
}

fn certificate(cost: &CostSpec, pot: &Potentials1D, primal: f64) -> Value {
    let violation = pot.max_feasibility_violation(cost);
    let gap = relative(pot.dual_value, primal);
    json!({
        "primal_value": primal,
        "dual_value": pot.dual_value,
        "relative_duality_gap": gap,
        "max_feasibility_violation": violation,
        "feasible": violation <= FEASIBILITY_TOL,
        "certified": violation <= FEASIBILITY_TOL && gap <= DUALITY_TOL,
    })
}

pub fn forward(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let cost = single_cost(cfg)?;
    let (mu, nu) = pair(cfg)?;
    let n = cfg.lp_n();
    if cost.kind() == CostKind::Concave {
        return forward_concave(&cost, &mu, &nu, n, art);
    }
    let value = ot_cost_quantile(&cost, &mu, &nu).op("ot_cost_quantile")?;
    art.tolerances("quantile", quadrature_tolerances());
    let map = monotone_map(&mu, &nu).op("monotone_map")?;
    let pot = potentials_1d(&cost, &mu, &nu).op("potentials_1d")?;
    let lp = lp_oracle(&cost, &mu, &nu, n)?;
    art.tolerances("lp", json!({"n": n, "relative_price_tol": 1e-12}));
    art.tolerances(
        "potentials",
        json!({"feasibility": FEASIBILITY_TOL, "relative_duality_gap": DUALITY_TOL}),
    );

    write_plan(art, &lp)?;
    write_potentials(art, &pot)?;
    art.csv("map.csv", &[], &["x", "t"], &grid_rows(&map))?;
    art.json(
        "forward.json",
        json!({
            "cost": cost.label(),
            "value": value,
            "lp": lp_report(&lp, n),
            "lp_relative_difference": relative(lp.coupling.value, value),
            "certificate": certificate(&cost, &pot, value),
        }),
    )?;
    Ok(json!({"value": value}))
}

fn forward_concave(cost: &CostSpec, mu: &Measure1D, nu: &Measure1D, n: usize, art: &mut Artifacts) -> CliResult<Value> {
    let ot = concave_ot_1d(cost, mu, nu, n).op("concave_ot_1d")?;
    art.tolerances("lp", json!({"n": n, "negligible_mass": 1e-12}));
    let mut report = json!({
        "cost": cost.label(),
        "value": ot.value,
        "common_mass": ot.jordan.common_mass,
        "leftover_mass": ot.jordan.leftover_mass(),
        "separation": ot.separation,
        "separated": ot.separated,
    });
    if let Some(lp) = &ot.leftover {
        write_plan(art, lp)?;
        report["lp"] = lp_report(lp, n);
        let rows = &lp.coupling.rows;
        let cols = &lp.coupling.cols;
        let u: Vec<Vec<f64>> = rows.atoms().iter().zip(&lp.u).map(|(&x, &u)| vec![x, u]).collect();
        let v: Vec<Vec<f64>> = cols.atoms().iter().zip(&lp.v).map(|(&y, &v)| vec![y, v]).collect();
        art.csv("potentials_f.csv", &[], &["x", "f"], &u)?;
        art.csv("potentials_g.csv", &[], &["y", "g"], &v)?;
    }
    if let Some(map) = ot.leftover_map() {
        art.csv("map.csv", &[], &["x", "t"], &grid_rows(&map))?;
    }
    art.json("forward.json", report)?;
    Ok(json!({"value": ot.value}))
}

pub fn potentials(cfg: &RunConfig, art: &mut Artifacts) -> CliResult<Value> {
    let cost = single_cost(cfg)?;
    if cost.kind() != CostKind::Convex {
        return Err(CliError::config(
            "InvalidInput",
            "potentials needs a convex cost; use forward for the concave LP duals",
        ));
    }
    let (mu, nu) = pair(cfg)?;
    let primal = ot_cost_quantile(&cost, &mu, &nu).op("ot_cost_quantile")?;
    let pot = potentials_1d(&cost, &mu, &nu).op("potentials_1d")?;
    art.tolerances("quantile", quadrature_tolerances());
    art.tolerances(
        "potentials",
        json!({"feasibility": FEASIBILITY_TOL, "relative_duality_gap": DUALITY_TOL}),
    );
    write_potentials(art, &pot)?;
    let cert = certificate(&cost, &pot, primal);
    art.json("certificate.json", json!({"cost": cost.label(), "certificate": cert.clone()}))?;
    Ok(cert)
}
