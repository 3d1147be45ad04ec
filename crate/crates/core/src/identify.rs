//! Identifiability diagnostics.
//!
//! A finite search can only ever certify that two costs are
//! *distinguishable*; when no witness turns up the report says so and
//! nothing more.

use alloc::string::String;
use alloc::vec::Vec;

use crate::cost::{CostKind, CostSpec};
use crate::error::{Error, Result};
use crate::forward::lp::{ot_lp, LpSolution};
use crate::forward::quantile::{ot_cost_quantile, potentials_1d};
use crate::measures::{affine_pushforward, discretize, LocationScaleFamily, Measure1D};
use crate::numeric::grid::{linspace, trapezoid};
use crate::numeric::optimize::golden_section_max;
use crate::numeric::GridFunction;
use crate::transforms::alpha_locscale;

/// Caveat attached to every report built from finitely many samples.
pub const DENSE_SUBSET_NOTE: &str =
    "hypothesis: values observed on an open set - not verifiable from finitely many samples";

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub a: f64,
    pub b: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiabilityReport {
    pub distinguishable: bool,
    /// First lattice point whose gap exceeds the tolerance.
    pub witness: Option<(f64, f64)>,
    pub max_value_gap: f64,
    /// `None` when plans were not compared.
    pub plans_agree: Option<bool>,
    /// Duality gaps of the LP instances behind the report.
    pub certificates: Vec<f64>,
    /// Local maximum of the gap found around the best lattice point.
    pub refined: Option<Refinement>,
    pub notes: Vec<String>,
}

/// The default 9 x 9 lattice over `[-2, 2] x [1.1, 3]`.
pub fn default_lattice() -> Vec<(f64, f64)> {
    let a = linspace(-2.0, 2.0, 9);
    let b = linspace(1.1, 3.0, 9);
    a.iter().flat_map(|&ai| b.iter().map(move |&bj| (ai, bj))).collect()
}

fn require_convex(c: &CostSpec) -> Result<()> {
    if c.kind() != CostKind::Convex {
        return Err(Error::InvalidInput("value comparisons need convex costs".into()));
    }
    Ok(())
}

/// `|α_{h1}(G_{a,b}, G) - α_{h2}(G_{a,b}, G)|` at one parameter point.
pub fn value_gap(c1: &CostSpec, c2: &CostSpec, family: &LocationScaleFamily, a: f64, b: f64) -> Result<f64> {
    require_convex(c1)?;
    require_convex(c2)?;
    // Integrate the difference directly so equal costs give exactly zero.
    let diff = alpha_locscale(|t| c1.value(t) - c2.value(t), family, a, b)?;
    Ok(diff.abs())
}

/// Builds the report from gaps evaluated at `params` (in the same order).
pub fn assemble_value_report(params: &[(f64, f64)], gaps: &[f64], tol: f64) -> IdentifiabilityReport {
    let witness = params.iter().zip(gaps).find(|(_, &g)| g > tol).map(|(&p, _)| p);
    let max_value_gap = gaps.iter().copied().fold(0.0, f64::max);
    let distinguishable = max_value_gap > tol;
    let mut notes = alloc::vec![String::from(DENSE_SUBSET_NOTE)];
    if !distinguishable {
        notes.push("no witness found on the search lattice".into());
    }
    IdentifiabilityReport {
        distinguishable,
        witness,
        max_value_gap,
        plans_agree: None,
        certificates: Vec::new(),
        refined: None,
        notes,
    }
}

/// Golden-section refinement of the gap around the best lattice point, one
/// coordinate at a time within the neighbouring lattice cells.
pub fn refine_gap(
    c1: &CostSpec,
    c2: &CostSpec,
    family: &LocationScaleFamily,
    params: &[(f64, f64)],
    gaps: &[f64],
) -> Option<Refinement> {
    let (best, _) = gaps
        .iter()
        .enumerate()
        .max_by(|p, q| p.1.total_cmp(q.1).then(q.0.cmp(&p.0)))?;
    let (a0, b0) = params[best];
    let spacing = |pick: fn(&(f64, f64)) -> f64, at: f64| {
        params
            .iter()
            .map(pick)
            .map(|v| (v - at).abs())
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min)
    };
    let da = spacing(|p| p.0, a0);
    let db = spacing(|p| p.1, b0);
    let eval = |a: f64, b: f64| value_gap(c1, c2, family, a, b).unwrap_or(f64::NEG_INFINITY);
    let mut a = a0;
    let mut gap = gaps[best];
    if da.is_finite() {
        let (x, g) = golden_section_max(|x| eval(x, b0), a0 - da, a0 + da, 40);
        if g > gap {
            a = x;
            gap = g;
        }
    }
    let mut b = b0;
    if db.is_finite() {
        let lo = (b0 - db).max(1e-6);
        let (x, g) = golden_section_max(|x| eval(a, x), lo, b0 + db, 40);
        if g > gap {
            b = x;
            gap = g;
        }
    }
    Some(Refinement { a, b, gap })
}

/// Lattice search for a parameter point where the two costs give different
/// OT values. Evaluations run sequentially here; callers wanting parallelism
/// evaluate [`value_gap`] themselves and use [`assemble_value_report`].
pub fn values_equal_on_family(
    c1: &CostSpec,
    c2: &CostSpec,
    family: &LocationScaleFamily,
    params: &[(f64, f64)],
    tol: f64,
) -> Result<IdentifiabilityReport> {
    let gaps = params
        .iter()
        .map(|&(a, b)| value_gap(c1, c2, family, a, b))
        .collect::<Result<Vec<f64>>>()?;
    let mut report = assemble_value_report(params, &gaps, tol);
    report.refined = refine_gap(c1, c2, family, params, &gaps);
    Ok(report)
}

/// Per-cost result of the plan-only demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanInstance {
    pub label: String,
    pub lp: LpSolution,
    /// Value of the same cost by the quantile formula.
    pub quantile_value: f64,
    /// True when the LP plan is the monotone (diagonal) matching.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlansReport {
    pub instances: Vec<PlanInstance>,
    pub plans_agree: bool,
    /// Largest pairwise difference of LP values.
    pub max_value_gap: f64,
    pub certificates: Vec<f64>,
}

/// Solves the same discretized problem under every cost and checks that a
/// single plan, the monotone one, is optimal for all of them.
pub fn plans_only_nonidentifiability(
    costs: &[CostSpec],
    mu: &Measure1D,
    nu: &Measure1D,
    n: usize,
) -> Result<PlansReport> {
    if costs.is_empty() {
        return Err(Error::InvalidInput("no candidate costs".into()));
    }
    let rows = discretize(mu, n)?;
    let cols = discretize(nu, n)?;
    let mut instances = Vec::with_capacity(costs.len());
    for cost in costs {
        require_convex(cost)?;
        let lp = ot_lp(&rows, &cols, cost)?;
        let monotone = (0..n).all(|i| {
            (0..n).all(|j| {
                let expected = if i == j { 1.0 / n as f64 } else { 0.0 };
                (lp.coupling.mass(i, j) - expected).abs() <= 1e-12
            })
        });
        instances.push(PlanInstance {
            label: cost.label(),
            quantile_value: ot_cost_quantile(cost, mu, nu)?,
            lp,
            monotone,
        });
    }
    let first = &instances[0].lp.coupling.plan;
    let plans_agree = instances.iter().all(|inst| {
        inst.lp
            .coupling
            .plan
            .iter()
            .zip(first)
            .all(|(p, q)| (p - q).abs() <= 1e-12)
    });
    let values: Vec<f64> = instances.iter().map(|i| i.lp.coupling.value).collect();
    let max_value_gap = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| (a - b).abs()))
        .fold(0.0, f64::max);
    let certificates = instances.iter().map(|i| i.lp.duality_gap).collect();
    Ok(PlansReport {
        instances,
        plans_agree,
        max_value_gap,
        certificates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariation {
    /// `[T(mu + t phi, nu) - T(mu, nu)] / t`.
    pub difference_quotient: f64,
    /// `∫ f phi`.
    pub inner_product: f64,
    pub discrepancy: f64,
    /// Central quotient `[T(mu + t phi) - T(mu - t phi)] / (2t)`, when
    /// `mu - t phi` is still a density.
    pub central_quotient: Option<f64>,
}

impl FirstVariation {
    pub fn relative_discrepancy(&self) -> f64 {
        self.discrepancy / self.inner_product.abs().max(1e-300)
    }
}

fn perturbed(mu: &Measure1D, phi: &GridFunction, t: f64) -> Result<core::result::Result<Measure1D, (usize, f64)>> {
    let density: Vec<f64> = mu
        .grid()
        .iter()
        .zip(mu.density())
        .map(|(&x, &d)| d + t * phi.eval_within(x).unwrap_or(0.0))
        .collect();
    if let Some(i) = density.iter().position(|&d| d < 0.0) {
        return Ok(Err((i, density[i])));
    }
    Ok(Ok(Measure1D::from_density(mu.grid().to_vec(), density)?))
}

/// Compares the right derivative of `t -> T_c(mu + t phi, nu)` at zero with
/// `∫ f phi`, `f` the optimal potential of `(mu, nu)`.
pub fn first_variation_check(
    cost: &CostSpec,
    mu: &Measure1D,
    nu: &Measure1D,
    phi: &GridFunction,
    t: f64,
) -> Result<FirstVariation> {
    require_convex(cost)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("step t = {t} must be positive")));
    }
    let mass = phi.integral();
    if mass.abs() > 1e-10 {
        return Err(Error::InvalidInput(alloc::format!("perturbation integrates to {mass:e}, not 0")));
    }
    let base = mu.to_tabulated();
    let plus = perturbed(&base, phi, t)?.map_err(|(index, value)| Error::NegativeDensity { index, value })?;
    let t0 = ot_cost_quantile(cost, &base, nu)?;
    let t_plus = ot_cost_quantile(cost, &plus, nu)?;
    let difference_quotient = (t_plus - t0) / t;

    let pot = potentials_1d(cost, &base, nu)?;
    let xs = base.grid();
    let integrand: Vec<f64> = xs
        .iter()
        .map(|&x| match (pot.f.eval_within(x), phi.eval_within(x)) {
            (Some(f), Some(p)) => f * p,
            _ => 0.0,
        })
        .collect();
    let inner_product = trapezoid(xs, &integrand);

    let central_quotient = match perturbed(&base, phi, -t)? {
        Ok(minus) => Some((t_plus - ot_cost_quantile(cost, &minus, nu)?) / (2.0 * t)),
        Err(_) => None,
    };
    Ok(FirstVariation {
        difference_quotient,
        inner_product,
        discrepancy: (difference_quotient - inner_product).abs(),
        central_quotient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineReduction {
    /// LP value between the pushed-forward atoms in `R^d`.
    pub embedded_value: f64,
    /// LP value between the 1D atoms under `h(|x - y|)`.
    pub line_value: f64,
    pub gap: f64,
    pub certificates: [f64; 2],
}

/// Checks that OT along the line `x -> x u + r` equals OT on the line.
pub fn affine_reduction_check(
    cost: &CostSpec,
    mu: &Measure1D,
    nu: &Measure1D,
    u: &[f64],
    r: &[f64],
    n: usize,
) -> Result<AffineReduction> {
    require_convex(cost)?;
    let embedded_mu = affine_pushforward(mu, u, r, n)?;
    let embedded_nu = affine_pushforward(nu, u, r, n)?;
    let embedded = ot_lp(&embedded_mu, &embedded_nu, cost)?;
    // The radial cost on the line is h(|x - y|).
    let line_mu = affine_pushforward(mu, &[1.0, 0.0], &[0.0, 0.0], n)?;
    let line_nu = affine_pushforward(nu, &[1.0, 0.0], &[0.0, 0.0], n)?;
    let line = ot_lp(&line_mu, &line_nu, cost)?;
    Ok(AffineReduction {
        embedded_value: embedded.coupling.value,
        line_value: line.coupling.value,
        gap: (embedded.coupling.value - line.coupling.value).abs(),
        certificates: [embedded.duality_gap, line.duality_gap],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_costs_have_no_witness() {
        let h = CostSpec::convex_power(2.0).unwrap();
        let params = [(0.0, 1.5), (1.0, 2.0)];
        let report = values_equal_on_family(&h, &h, &LocationScaleFamily::Normal, &params, 1e-8).unwrap();
        assert!(!report.distinguishable);
        assert!(report.witness.is_none());
        assert!(report.max_value_gap <= 1e-10);
    }

    #[test]
    fn constant_shift_gap() {
        let h = CostSpec::convex_power(2.0).unwrap();
        let k = h.clone().with_offset(0.5);
        let params = [(-1.0, 1.5), (0.0, 2.0)];
        let report = values_equal_on_family(&h, &k, &LocationScaleFamily::Normal, &params, 1e-8).unwrap();
        assert_eq!(report.witness, Some((-1.0, 1.5)));
        assert!((report.max_value_gap - 0.5).abs() < 1e-12, "{}", report.max_value_gap);
    }

    #[test]
    fn lattice_shape() {
        let l = default_lattice();
        assert_eq!(l.len(), 81);
        assert_eq!(l[0], (-2.0, 1.1));
        assert_eq!(l[80], (2.0, 3.0));
    }
}
