//! Convex costs on the line: the monotone coupling is optimal, so values,
//! maps and potentials all follow from quantile functions.

use alloc::vec::Vec;

use crate::cost::{CostKind, CostSpec};
use crate::error::{Error, Result};
use crate::measures::Measure1D;
use crate::numeric::grid::trapezoid;
use crate::numeric::quadrature::{integrate_unit_interval, UnitIntervalRule};
use crate::numeric::GridFunction;

fn require_convex(cost: &CostSpec) -> Result<()> {
    match cost.kind() {
        CostKind::Convex => Ok(()),
        CostKind::Concave => Err(Error::InvalidInput(
            "quantile formulas need a convex cost of the difference".into(),
        )),
    }
}

/// `∫_0^1 h(F^{-1}(u) - G^{-1}(u)) du` for an arbitrary `h`.
pub fn quantile_cost_with<H: FnMut(f64) -> f64>(mut h: H, mu: &Measure1D, nu: &Measure1D) -> Result<f64> {
    integrate_unit_interval(|u| h(mu.quantile(u) - nu.quantile(u)), &UnitIntervalRule::default())
}

/// OT value for a convex cost, by quadrature over quantile levels.
pub fn ot_cost_quantile(cost: &CostSpec, mu: &Measure1D, nu: &Measure1D) -> Result<f64> {
    require_convex(cost)?;
    quantile_cost_with(|t| cost.value(t), mu, nu)
}

/// `T = F_nu^{-1} ∘ F_mu` sampled at the grid points of `supp mu`.
pub fn monotone_map(mu: &Measure1D, nu: &Measure1D) -> Result<GridFunction> {
    let (lo, hi) = mu.support_indices();
    let (nu_lo, nu_hi) = nu.support();
    let x = mu.grid()[lo..=hi].to_vec();
    let t: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let u = mu.cdf_at(xi);
            if u <= 0.0 {
                nu_lo
            } else if u >= 1.0 {
                nu_hi
            } else {
                nu.quantile(u)
            }
        })
        .collect();
    GridFunction::new(x, t)
}

/// `f'(x) = h'(x - T(x))` on the grid of `supp mu`.
pub fn potential_derivative_1d(cost: &CostSpec, mu: &Measure1D, nu: &Measure1D) -> Result<GridFunction> {
    require_convex(cost)?;
    let map = monotone_map(mu, nu)?;
    Ok(map.map_values(|x, t| cost.derivative(x - t)))
}

/// Grid-sampled dual potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials1D {
    pub f: GridFunction,
    pub fprime: GridFunction,
    pub g: GridFunction,
    pub dual_value: f64,
}

impl Potentials1D {
    /// `max (f(x) + g(y) - c(x, y))` over the full grid product; `<= 0`
    /// means feasible.
    pub fn max_feasibility_violation(&self, cost: &CostSpec) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (&x, &fx) in self.f.x().iter().zip(self.f.y()) {
            for (&y, &gy) in self.g.x().iter().zip(self.g.y()) {
                worst = worst.max(fx + gy - cost.value(x - y));
            }
        }
        worst
    }
}

/// `f` integrates `f'` from the left edge of `supp mu` (where it is pinned to
/// zero); `g` is the c-transform of `f` over the same grid.
pub fn potentials_1d(cost: &CostSpec, mu: &Measure1D, nu: &Measure1D) -> Result<Potentials1D> {
    let fprime = potential_derivative_1d(cost, mu, nu)?;
    let x0 = fprime.x()[0];
    let f = fprime.antiderivative(x0, 0.0);
    let (lo, hi) = nu.support_indices();
    let ys = nu.grid()[lo..=hi].to_vec();
    let gy: Vec<f64> = ys
        .iter()
        .map(|&y| {
            f.x()
                .iter()
                .zip(f.y())
                .map(|(&x, &fx)| cost.value(x - y) - fx)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let g = GridFunction::new(ys, gy)?;

    let (mlo, mhi) = mu.support_indices();
    let mu_density = &mu.density()[mlo..=mhi];
    let nu_density = &nu.density()[lo..=hi];
    let f_mu: Vec<f64> = f.y().iter().zip(mu_density).map(|(a, b)| a * b).collect();
    let g_nu: Vec<f64> = g.y().iter().zip(nu_density).map(|(a, b)| a * b).collect();
    let dual_value = trapezoid(f.x(), &f_mu) + trapezoid(g.x(), &g_nu);
    if !dual_value.is_finite() {
        return Err(Error::NonFiniteInput { what: "dual potentials" });
    }
    Ok(Potentials1D {
        f,
        fprime,
        g,
        dual_value,
    })
}
