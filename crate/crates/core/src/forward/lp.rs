//! Exact transportation simplex between finitely supported measures.
//!
//! Starts from the north-west corner basis, prices with the spanning-tree
//! duals and pivots with Bland's rule (lowest-index entering cell, lowest-index
//! leaving cell on ties), so the result is deterministic. The dual variables
//! double as a certificate of optimality.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Largest number of plan cells the solver accepts.
pub const MAX_LP_CELLS: usize = 1_000_000;

const MASS_TOL: f64 = 1e-9;

/// A transport plan between two discrete measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub rows: DiscreteMeasure,
    pub cols: DiscreteMeasure,
    /// Row-major `rows.len() x cols.len()` masses.
    pub plan: Vec<f64>,
    pub value: f64,
}

impl Coupling {
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.cols.len() + j]
    }

    /// Largest deviation of row and column sums from the marginal weights.
    pub fn marginal_error(&self) -> f64 {
        let (n, m) = (self.rows.len(), self.cols.len());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let s: f64 = self.plan[i * m..(i + 1) * m].iter().sum();
            worst = worst.max((s - self.rows.weights()[i]).abs());
        }
        for j in 0..m {
            let s: f64 = (0..n).map(|i| self.plan[i * m + j]).sum();
            worst = worst.max((s - self.cols.weights()[j]).abs());
        }
        worst
    }

    /// Nonzero cells as `(i, j, mass)` in row-major order.
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        let m = self.cols.len();
        self.plan
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| (k / m, k % m, p))
            .collect()
    }

    /// Mass-weighted mean of the column atoms paired with row `i` (1D only).
    pub fn barycenter(&self, i: usize) -> f64 {
        let m = self.cols.len();
        let row = &self.plan[i * m..(i + 1) * m];
        let mass: f64 = row.iter().sum();
        row.iter().zip(self.cols.atoms()).map(|(p, y)| p * y).sum::<f64>() / mass
    }
}

/// Optimal plan together with its dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub coupling: Coupling,
    /// Row potentials `u_i`.
    pub u: Vec<f64>,
    /// Column potentials `v_j`.
    pub v: Vec<f64>,
    pub dual_value: f64,
    /// `|primal - dual|`.
    pub duality_gap: f64,
    /// `max (u_i + v_j - c_ij)`, zero or negative at optimality up to rounding.
    pub max_dual_violation: f64,
    pub pivots: usize,
}

pub fn ot_lp(rows: &DiscreteMeasure, cols: &DiscreteMeasure, cost: &CostSpec) -> Result<LpSolution> {
    if rows.dim() != cols.dim() {
        return Err(Error::InvalidInput(alloc::format!(
            "measures live in dimensions {} and {}",
            rows.dim(),
            cols.dim()
        )));
    }
    let (n, m) = (rows.len(), cols.len());
    if n.saturating_mul(m) > MAX_LP_CELLS {
        return Err(Error::SizeExceeded {
            rows: n,
            cols: m,
            cap: MAX_LP_CELLS,
        });
    }
    let (row_mass, col_mass) = (rows.total_mass(), cols.total_mass());
    if (row_mass - col_mass).abs() > MASS_TOL {
        return Err(Error::Infeasible { row_mass, col_mass });
    }
    let c: Vec<f64> = (0..n * m)
        .map(|k| cost.between(rows.atom(k / m), cols.atom(k % m)))
        .collect();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { what: "cost matrix" });
    }

    let mut solver = Simplex::north_west(rows.weights(), cols.weights(), &c, n, m);
    solver.optimize()?;

    let plan: Vec<f64> = solver.flow.iter().map(|&f| f.max(0.0)).collect();
    let value: f64 = plan.iter().zip(&c).map(|(p, c)| p * c).sum();
    let (u, v) = solver.duals();
    let dual_value = rows.weights().iter().zip(&u).map(|(a, u)| a * u).sum::<f64>()
        + cols.weights().iter().zip(&v).map(|(b, v)| b * v).sum::<f64>();
    let mut max_dual_violation = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..m {
            max_dual_violation = max_dual_violation.max(u[i] + v[j] - c[i * m + j]);
        }
    }
    Ok(LpSolution {
        coupling: Coupling {
            rows: rows.clone(),
            cols: cols.clone(),
            plan,
            value,
        },
        u,
        v,
        dual_value,
        duality_gap: (value - dual_value).abs(),
        max_dual_violation,
        pivots: solver.pivots,
    })
}

struct Simplex<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    flow: Vec<f64>,
    basic: Vec<bool>,
    basis: Vec<usize>,
    pivots: usize,
    price_tol: f64,
}

impl<'a> Simplex<'a> {
    fn north_west(a: &[f64], b: &[f64], cost: &'a [f64], n: usize, m: usize) -> Self {
        let mut flow = vec![0.0; n * m];
        let mut basic = vec![false; n * m];
        let mut basis = Vec::with_capacity(n + m - 1);
        let mut supply = a.to_vec();
        let mut demand = b.to_vec();
        let scale = a.iter().sum::<f64>().max(1e-300);
        let (mut i, mut j) = (0, 0);
        loop {
            let q = supply[i].min(demand[j]).max(0.0);
            let k = i * m + j;
            flow[k] = q;
            basic[k] = true;
            basis.push(k);
            supply[i] -= q;
            demand[j] -= q;
            if i == n - 1 && j == m - 1 {
                break;
            }
            // A degenerate corner moves down only, keeping a zero-flow basic
            // cell so the basis stays a spanning tree.
            let row_done = supply[i] <= 1e-15 * scale;
            if (row_done && i < n - 1) || j == m - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        let price_tol = 1e-12 * cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        Self {
            n,
            m,
            cost,
            flow,
            basic,
            basis,
            pivots: 0,
            price_tol,
        }
    }

    // Tree nodes: rows are 0..n, columns are n..n+m.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n + self.m];
        for &k in &self.basis {
            let (i, j) = (k / self.m, k % self.m);
            adj[i].push((self.n + j, k));
            adj[self.n + j].push((i, k));
        }
        adj
    }

    /// Potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
    fn duals(&self) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; self.n + self.m];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &(next, k) in &adj[node] {
                if pot[next].is_nan() {
                    pot[next] = self.cost[k] - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(self.n);
        (pot, v)
    }

    fn optimize(&mut self) -> Result<()> {
        let cap = 50 * self.n * self.m + 1000;
        loop {
            let (u, v) = self.duals();
            let entering = (0..self.n * self.m).find(|&k| {
                !self.basic[k] && self.cost[k] - u[k / self.m] - v[k % self.m] < -self.price_tol
            });
            let Some(enter) = entering else {
                return Ok(());
            };
            self.pivot(enter);
            self.pivots += 1;
            if self.pivots > cap {
                return Err(Error::Unsupported(alloc::format!(
                    "transportation simplex exceeded {cap} pivots"
                )));
            }
        }
    }

    fn pivot(&mut self, enter: usize) {
        let (ei, ej) = (enter / self.m, enter % self.m);
        // Tree path from column ej back to row ei.
        let adj = self.adjacency();
        let total = self.n + self.m;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut seen = vec![false; total];
        seen[ei] = true;
        let mut queue = VecDeque::from([ei]);
        let target = self.n + ej;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while let Some((prev, k)) = parent[node] {
            path.push(k);
            node = prev;
        }
        // Cells on the path alternate: donor, receiver, donor, ...
        let donors: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = donors.iter().map(|&k| self.flow[k]).fold(f64::INFINITY, f64::min);
        let leave = donors
            .iter()
            .copied()
            .filter(|&k| self.flow[k] <= theta)
            .min()
            .expect("cycle has a donor cell");
        self.flow[enter] += theta;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                self.flow[k] -= theta;
            } else {
                self.flow[k] += theta;
            }
        }
        self.flow[leave] = 0.0;
        self.basic[leave] = false;
        self.basic[enter] = true;
        let slot = self.basis.iter().position(|&k| k == leave).expect("leaving cell is basic");
        self.basis[slot] = enter;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(atoms: &[f64]) -> DiscreteMeasure {
        let n = atoms.len();
        DiscreteMeasure::new(1, atoms.to_vec(), vec![1.0 / n as f64; n]).unwrap()
    }

    #[test]
    fn single_atoms() {
        let h = CostSpec::convex_power(2.0).unwrap();
        let sol = ot_lp(&line(&[0.5]), &line(&[2.0]), &h).unwrap();
        assert_eq!(sol.coupling.plan, vec![1.0]);
        assert!((sol.coupling.value - 2.25).abs() < 1e-15);
    }

    #[test]
    fn convex_pairs_monotonically() {
        let h = CostSpec::convex_power(2.0).unwrap();
        let sol = ot_lp(&line(&[0.0, 1.0]), &line(&[2.0, 3.0]), &h).unwrap();
        assert_eq!(sol.coupling.plan, vec![0.5, 0.0, 0.0, 0.5]);
        assert!((sol.coupling.value - 4.0).abs() < 1e-12);
        assert!(sol.duality_gap < 1e-12);
    }

    #[test]
    fn concave_pairs_anti_monotonically() {
        let l = CostSpec::concave_power(0.5).unwrap();
        let sol = ot_lp(&line(&[0.0, 1.0]), &line(&[2.0, 3.0]), &l).unwrap();
        assert_eq!(sol.coupling.plan, vec![0.0, 0.5, 0.5, 0.0]);
        let expected = (3.0f64.sqrt() + 1.0) / 2.0;
        assert!((sol.coupling.value - expected).abs() < 1e-12);
        assert!(sol.duality_gap < 1e-12);
    }

    #[test]
    fn unequal_masses_are_infeasible() {
        let h = CostSpec::convex_power(2.0).unwrap();
        let heavy = DiscreteMeasure::new(1, vec![0.0], vec![1.1]).unwrap();
        assert!(matches!(ot_lp(&heavy, &line(&[1.0]), &h), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn size_cap() {
        let h = CostSpec::convex_power(2.0).unwrap();
        let atoms: Vec<f64> = (0..1001).map(|i| i as f64).collect();
        let big = line(&atoms);
        assert!(matches!(ot_lp(&big, &big, &h), Err(Error::SizeExceeded { .. })));
    }
}
