//! Concave costs of the distance on the line.
//!
//! Mass shared by both marginals stays put at zero cost, so only the two
//! parts of the Jordan decomposition are transported. Each part is
//! discretized into equal-mass atoms and the leftover problem is solved
//! exactly.

use alloc::vec::Vec;

use crate::cost::{CostKind, CostSpec};
use crate::error::{Error, Result};
use crate::forward::lp::{ot_lp, LpSolution};
use crate::measures::{discretize, jordan_decompose, DiscreteMeasure, JordanDecomposition, Measure1D};
use crate::numeric::GridFunction;

/// Leftover masses below this are treated as absent.
const NEGLIGIBLE_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveOt {
    /// Total OT value; common mass contributes only through a cost offset.
    pub value: f64,
    pub jordan: JordanDecomposition,
    /// Exact solution between the discretized leftovers, `None` when `mu = nu`.
    pub leftover: Option<LpSolution>,
    /// Distance between the grid points carrying positive density in the two
    /// leftovers.
    pub separation: Option<f64>,
    /// True when `separation` exceeds 1.5 grid spacings; the potentials are
    /// then unique.
    pub separated: bool,
}

impl ConcaveOt {
    /// Observed map `T(x_i)` on the leftover row atoms, as plan barycenters.
    pub fn leftover_map(&self) -> Option<GridFunction> {
        let sol = self.leftover.as_ref()?;
        let x = sol.coupling.rows.atoms().to_vec();
        let t = (0..x.len()).map(|i| sol.coupling.barycenter(i)).collect();
        GridFunction::new(x, t).ok()
    }

    /// Potential gradient `f'(x_i)` on the leftover row atoms.
    ///
    /// `f` is the c-transform of the column potentials, so at `x_i` it is
    /// differentiated along its active column `j*`; ties go to the column
    /// carrying most of row `i`'s mass, then to the lowest index.
    pub fn leftover_fprime(&self, cost: &CostSpec) -> Option<GridFunction> {
        let sol = self.leftover.as_ref()?;
        let rows = &sol.coupling.rows;
        let cols = &sol.coupling.cols;
        let m = cols.len();
        let scale = sol.v.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let mut fprime = Vec::with_capacity(rows.len());
        for i in 0..rows.len() {
            let x = rows.atoms()[i];
            let reduced: Vec<f64> = (0..m).map(|j| cost.value(x - cols.atoms()[j]) - sol.v[j]).collect();
            let best = reduced.iter().copied().fold(f64::INFINITY, f64::min);
            let mut star = None;
            for (j, &r) in reduced.iter().enumerate() {
                if r <= best + 1e-12 * scale {
                    star = match star {
                        Some(s) if sol.coupling.mass(i, s) >= sol.coupling.mass(i, j) => Some(s),
                        _ => Some(j),
                    };
                }
            }
            let d = x - cols.atoms()[star?];
            fprime.push(cost.derivative(d.abs()) * d.signum());
        }
        GridFunction::new(rows.atoms().to_vec(), fprime).ok()
    }
}

fn leftover_measure(grid: &[f64], density: &[f64], mass: f64, n: usize) -> Result<DiscreteMeasure> {
    let normalized = Measure1D::from_density(grid.to_vec(), density.to_vec())?;
    discretize(&normalized, n)?.scaled(mass)
}

fn separation(jordan: &JordanDecomposition) -> Option<f64> {
    let plus: Vec<f64> = jordan
        .grid
        .iter()
        .zip(&jordan.plus)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&x, _)| x)
        .collect();
    let minus: Vec<f64> = jordan
        .grid
        .iter()
        .zip(&jordan.minus)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&x, _)| x)
        .collect();
    if plus.is_empty() || minus.is_empty() {
        return None;
    }
    // Both lists are ascending: merge-walk for the closest pair.
    let (mut i, mut j) = (0, 0);
    let mut best = f64::INFINITY;
    while i < plus.len() && j < minus.len() {
        best = best.min((plus[i] - minus[j]).abs());
        if plus[i] < minus[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Some(best)
}

pub fn concave_ot_1d(cost: &CostSpec, mu: &Measure1D, nu: &Measure1D, n: usize) -> Result<ConcaveOt> {
    if cost.kind() != CostKind::Concave {
        return Err(Error::InvalidInput("concave_ot_1d needs a concave cost".into()));
    }
    let jordan = jordan_decompose(mu, nu)?;
    let mass = jordan.leftover_mass();
    let step = jordan.grid.get(1).map_or(0.0, |x| x - jordan.grid[0]);
    let separation = separation(&jordan);
    let separated = separation.is_some_and(|d| d > 1.5 * step);
    if mass <= NEGLIGIBLE_MASS {
        return Ok(ConcaveOt {
            value: cost.offset(),
            jordan,
            leftover: None,
            separation,
            separated,
        });
    }
    let rows = leftover_measure(&jordan.grid, &jordan.plus, mass, n)?;
    let cols = leftover_measure(&jordan.grid, &jordan.minus, mass, n)?;
    let sol = ot_lp(&rows, &cols, cost)?;
    let value = sol.coupling.value + cost.offset() * jordan.common_mass;
    Ok(ConcaveOt {
        value,
        jordan,
        leftover: Some(sol),
        separation,
        separated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_measures_move_nothing() {
        let mu = Measure1D::uniform(0.0, 1.0, 101).unwrap();
        let l = CostSpec::concave_power(0.5).unwrap();
        let ot = concave_ot_1d(&l, &mu, &mu, 10).unwrap();
        assert_eq!(ot.value, 0.0);
        assert!(ot.leftover.is_none());
        assert_eq!(ot.jordan.common_mass, 1.0);
    }

    #[test]
    fn disjoint_uniforms_are_separated() {
        let mu = Measure1D::uniform(0.0, 1.0, 101).unwrap();
        let nu = Measure1D::uniform(3.0, 4.0, 101).unwrap();
        let l = CostSpec::concave_power(0.5).unwrap();
        let ot = concave_ot_1d(&l, &mu, &nu, 20).unwrap();
        assert!(ot.separated);
        let step = ot.jordan.grid[1] - ot.jordan.grid[0];
        assert!((ot.separation.unwrap() - 2.0).abs() <= step + 1e-12, "{:?}", ot.separation);
    }
}
