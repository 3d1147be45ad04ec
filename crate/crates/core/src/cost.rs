//! Transport costs: convex functions of the difference and concave
//! functions of the distance.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    /// `c(x, y) = h(x - y)`, `h` strictly convex.
    Convex,
    /// `c(x, y) = l(|x - y|)`, `l` strictly concave and increasing.
    Concave,
}

impl CostKind {
    pub fn name(self) -> &'static str {
        match self {
            CostKind::Convex => "convex",
            CostKind::Concave => "concave",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// `|t|^p`, `p > 1`.
    ConvexPower(f64),
    /// `t^p` on `t >= 0`, `0 < p < 1`.
    ConcavePower(f64),
    Grid {
        kind: CostKind,
        values: GridFunction,
        slope: GridFunction,
        /// `(slope, abscissa)` pairs: the inverse of `slope`.
        inverse_slope: GridFunction,
    },
}

/// A cost together with its derivative and the inverse of the derivative.
///
/// `offset` adds a constant to every value; derivatives ignore it. Costs
/// in the admissible classes have `offset == 0`, the shifted versions exist
/// to exhibit the additive-constant ambiguity.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    shape: Shape,
    offset: f64,
}

impl CostSpec {
    pub fn convex_power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidInput(alloc::format!("convex power needs p > 1, got {p}")));
        }
        Ok(Self {
            shape: Shape::ConvexPower(p),
            offset: 0.0,
        })
    }

    pub fn concave_power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(alloc::format!("concave power needs 0 < p < 1, got {p}")));
        }
        Ok(Self {
            shape: Shape::ConcavePower(p),
            offset: 0.0,
        })
    }

    /// Convex cost tabulated as `h(x_i)`. The derivative is taken by finite
    /// differences and must be strictly increasing.
    pub fn convex_grid(x: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        Self::grid(CostKind::Convex, x, h)
    }

    /// Concave cost tabulated as `l(t_i)` on `t_i >= 0`. The derivative must
    /// be positive and strictly decreasing.
    pub fn concave_grid(t: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        Self::grid(CostKind::Concave, t, l)
    }

    fn grid(kind: CostKind, x: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let problems = grid_cost_diagnostics(kind, &x, &h);
        if let Some(first) = problems.into_iter().next() {
            return Err(Error::InvalidInput(first));
        }
        let values = GridFunction::new(x, h)?;
        let slope = GridFunction::new(values.x().to_vec(), finite_difference_slopes(values.x(), values.y()))?;
        let inverse_slope = match kind {
            CostKind::Convex => GridFunction::new(slope.y().to_vec(), slope.x().to_vec())?,
            CostKind::Concave => {
                let sx: Vec<f64> = slope.y().iter().rev().copied().collect();
                let sy: Vec<f64> = slope.x().iter().rev().copied().collect();
                GridFunction::new(sx, sy)?
            }
        };
        Ok(Self {
            shape: Shape::Grid {
                kind,
                values,
                slope,
                inverse_slope,
            },
            offset: 0.0,
        })
    }

    /// The same cost plus the constant `k`.
    pub fn with_offset(mut self, k: f64) -> Self {
        self.offset += k;
        self
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn kind(&self) -> CostKind {
        match &self.shape {
            Shape::ConvexPower(_) => CostKind::Convex,
            Shape::ConcavePower(_) => CostKind::Concave,
            Shape::Grid { kind, .. } => *kind,
        }
    }

    /// Exponent `p` with the cost dominated by `|t|^p`. Grid costs report the
    /// slope of `log h` against `log |t|` over the outer half of their grid.
    pub fn growth_p(&self) -> f64 {
        match &self.shape {
            Shape::ConvexPower(p) | Shape::ConcavePower(p) => *p,
            Shape::Grid { values, .. } => {
                let n = values.len();
                let (x0, y0) = (values.x()[n / 2].abs(), values.y()[n / 2]);
                let (x1, y1) = (values.x()[n - 1].abs(), values.y()[n - 1]);
                if x0 > 0.0 && x1 > x0 && y0 > 0.0 && y1 > 0.0 {
                    (y1 / y0).ln() / (x1 / x0).ln()
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// Builtin power costs satisfy the cone condition; grid costs are unchecked.
    pub fn cone_condition_verified(&self) -> bool {
        !matches!(self.shape, Shape::Grid { .. })
    }

    /// `h(t)` for convex costs, `l(|t|)` for concave ones.
    pub fn value(&self, t: f64) -> f64 {
        let base = match &self.shape {
            Shape::ConvexPower(p) => t.abs().powf(*p),
            Shape::ConcavePower(p) => t.abs().powf(*p),
            Shape::Grid { kind, values, .. } => match kind {
                CostKind::Convex => values.eval(t),
                CostKind::Concave => values.eval(t.abs()),
            },
        };
        base + self.offset
    }

    /// `c(x, y)` for points of equal dimension: `h(x - y)` on the line,
    /// `h(|x - y|)` (or `l(|x - y|)`) otherwise.
    pub fn between(&self, x: &[f64], y: &[f64]) -> f64 {
        if x.len() == 1 {
            return self.value(x[0] - y[0]);
        }
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.value(d2.sqrt())
    }

    /// `h'(t)` for convex costs; `l'(t)` for concave ones (`t > 0`).
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::ConvexPower(p) => p * t.abs().powf(p - 1.0) * t.signum() * (t != 0.0) as u8 as f64,
            Shape::ConcavePower(p) => p * t.powf(p - 1.0),
            Shape::Grid { slope, .. } => slope.eval(t),
        }
    }

    /// `(h')^{-1}(y)` for convex costs; `(l')^{-1}(s)` for concave ones (`s > 0`).
    pub fn conjugate_gradient(&self, y: f64) -> f64 {
        match &self.shape {
            Shape::ConvexPower(p) => (y.abs() / p).powf(1.0 / (p - 1.0)) * y.signum() * (y != 0.0) as u8 as f64,
            Shape::ConcavePower(p) => (y / p).powf(1.0 / (p - 1.0)),
            Shape::Grid { inverse_slope, .. } => inverse_slope.eval(y),
        }
    }

    /// Tabulation grid of grid costs.
    pub fn grid_points(&self) -> Option<&[f64]> {
        match &self.shape {
            Shape::Grid { values, .. } => Some(values.x()),
            _ => None,
        }
    }

    /// Short label such as `power:2` or `concave:0.5`.
    pub fn label(&self) -> String {
        let base = match &self.shape {
            Shape::ConvexPower(p) => alloc::format!("power:{p}"),
            Shape::ConcavePower(p) => alloc::format!("concave:{p}"),
            Shape::Grid { kind, values, .. } => alloc::format!("{}-grid[{}]", kind.name(), values.len()),
        };
        if self.offset != 0.0 {
            alloc::format!("{base}+{}", self.offset)
        } else {
            base
        }
    }
}

fn finite_difference_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (y[1] - y[0]) / (x[1] - x[0])
            } else if i == n - 1 {
                (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2])
            } else {
                // Three-point derivative on a possibly uneven grid.
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                (h0 * h0 * (y[i + 1] - y[i]) + h1 * h1 * (y[i] - y[i - 1])) / (h0 * h1 * (h0 + h1))
            }
        })
        .collect()
}

/// Every violated invariant of a tabulated cost, each naming the offending
/// indices. An empty list means the table is admissible.
pub fn grid_cost_diagnostics(kind: CostKind, x: &[f64], h: &[f64]) -> Vec<String> {
    let mut out = Vec::new();
    if x.len() != h.len() {
        out.push(alloc::format!("grid has {} abscissae but {} values", x.len(), h.len()));
        return out;
    }
    if x.len() < 3 {
        out.push("a cost grid needs at least 3 points".into());
        return out;
    }
    if x.iter().chain(h).any(|v| !v.is_finite()) {
        out.push("cost grid contains non-finite values".into());
        return out;
    }
    let unsorted: Vec<usize> = (1..x.len()).filter(|&i| x[i] <= x[i - 1]).collect();
    if !unsorted.is_empty() {
        out.push(alloc::format!("abscissae not strictly ascending at indices {unsorted:?}"));
        return out;
    }
    let slopes = finite_difference_slopes(x, h);
    match kind {
        CostKind::Convex => {
            let bad: Vec<usize> = (1..slopes.len()).filter(|&i| slopes[i] <= slopes[i - 1]).collect();
            if !bad.is_empty() {
                out.push(alloc::format!("h' is not strictly increasing at indices {bad:?}"));
            }
            if x[0] <= 0.0 && x[x.len() - 1] >= 0.0 {
                let h0 = GridFunction::new(x.to_vec(), h.to_vec()).map(|g| g.eval(0.0)).unwrap_or(f64::NAN);
                if h0.abs() > 1e-12 {
                    out.push(alloc::format!("h(0) = {h0}, expected 0"));
                }
            }
        }
        CostKind::Concave => {
            if x[0] < 0.0 {
                out.push("concave cost grid must start at t >= 0".into());
            }
            if x[0] == 0.0 && h[0].abs() > 1e-12 {
                out.push(alloc::format!("l(0) = {}, expected 0", h[0]));
            }
            let nonpositive: Vec<usize> = (0..slopes.len()).filter(|&i| slopes[i] <= 0.0).collect();
            if !nonpositive.is_empty() {
                out.push(alloc::format!("l' is not positive at indices {nonpositive:?}"));
            }
            let bad: Vec<usize> = (1..slopes.len()).filter(|&i| slopes[i] >= slopes[i - 1]).collect();
            if !bad.is_empty() {
                out.push(alloc::format!("l' is not strictly decreasing at indices {bad:?}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::grid::linspace;

    #[test]
    fn power_conjugate_gradient_inverts_derivative() {
        let h = CostSpec::convex_power(3.0).unwrap();
        for &t in &[-2.0, -0.3, 0.0, 0.7, 1.9] {
            assert!((h.conjugate_gradient(h.derivative(t)) - t).abs() < 1e-12);
        }
        let l = CostSpec::concave_power(0.5).unwrap();
        // l'(t) = 1/(2 sqrt t), so (l')^{-1}(0.25) = 4.
        assert!((l.conjugate_gradient(0.25) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_cost_matches_power() {
        let x = linspace(-2.0, 2.0, 801);
        let h: Vec<f64> = x.iter().map(|t| t * t).collect();
        let c = CostSpec::convex_grid(x, h).unwrap();
        assert!((c.value(1.5) - 2.25).abs() < 1e-4);
        assert!((c.derivative(1.0) - 2.0).abs() < 1e-9);
        assert!((c.conjugate_gradient(2.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagnostics_name_offending_indices() {
        let x = linspace(-1.0, 1.0, 5);
        let h = alloc::vec![1.0, 0.0, 0.0, 0.5, 1.0];
        let problems = grid_cost_diagnostics(CostKind::Convex, &x, &h);
        assert!(problems.iter().any(|p| p.contains("indices")), "{problems:?}");
        assert!(CostSpec::convex_grid(x, h).is_err());
    }

    #[test]
    fn offset_shifts_values_not_derivatives() {
        let h = CostSpec::convex_power(2.0).unwrap();
        let k = h.clone().with_offset(5.0);
        assert_eq!(k.value(1.0), 6.0);
        assert_eq!(k.derivative(1.0), h.derivative(1.0));
    }

    #[test]
    fn multivariate_cost_uses_norm() {
        let h = CostSpec::convex_power(2.0).unwrap();
        assert!((h.between(&[0.0, 0.0], &[3.0, 4.0]) - 25.0).abs() < 1e-12);
    }
}
