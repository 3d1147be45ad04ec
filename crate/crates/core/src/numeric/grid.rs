use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + h * i as f64 })
                .collect()
        }
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Running trapezoid integral starting at zero.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    if !x.is_empty() {
        out.push(0.0);
    }
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Index `i` with `xs[i] <= x < xs[i + 1]`, clamped to `[0, len - 2]`.
pub(crate) fn cell_index(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    debug_assert!(n >= 2);
    if x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap_or(core::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

/// Samples `(x_i, y_i)` of a real function on an ascending grid, evaluated
/// by piecewise-linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl GridFunction {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(alloc::format!(
                "grid has {} abscissae but {} values",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::InvalidInput("empty grid function".into()));
        }
        crate::error::ensure_finite(&x, "grid abscissae")?;
        crate::error::ensure_finite(&y, "grid values")?;
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid abscissae must be strictly ascending".into()));
        }
        Ok(Self { x, y })
    }

    /// Tabulates `f` on `x`.
    pub fn sample<F: FnMut(f64) -> f64>(x: Vec<f64>, mut f: F) -> Result<Self> {
        let y = x.iter().map(|&t| f(t)).collect();
        Self::new(x, y)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        t >= lo && t <= hi
    }

    /// Linear interpolation, extended linearly past both ends.
    pub fn eval(&self, t: f64) -> f64 {
        if self.x.len() == 1 {
            return self.y[0];
        }
        let i = cell_index(&self.x, t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let w = (t - x0) / (x1 - x0);
        self.y[i] + w * (self.y[i + 1] - self.y[i])
    }

    /// Interpolated value, or `None` outside the tabulated domain.
    pub fn eval_within(&self, t: f64) -> Option<f64> {
        self.contains(t).then(|| self.eval(t))
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.x, &self.y)
    }

    /// Running trapezoid integral anchored so that it equals `value` at `anchor`.
    pub fn antiderivative(&self, anchor: f64, value: f64) -> GridFunction {
        let running = cumulative_trapezoid(&self.x, &self.y);
        let raw = GridFunction {
            x: self.x.clone(),
            y: running,
        };
        let shift = value - raw.eval_antiderivative_at(anchor, self);
        GridFunction {
            x: raw.x,
            y: raw.y.into_iter().map(|v| v + shift).collect(),
        }
    }

    // Exact integral of the piecewise-linear interpolant from x[0] to t.
    fn eval_antiderivative_at(&self, t: f64, integrand: &GridFunction) -> f64 {
        if self.x.len() == 1 {
            return 0.0;
        }
        let i = cell_index(&self.x, t);
        let x0 = self.x[i];
        let y0 = integrand.y[i];
        let slope = (integrand.y[i + 1] - y0) / (self.x[i + 1] - x0);
        let d = t - x0;
        self.y[i] + y0 * d + 0.5 * slope * d * d
    }

    pub fn map_values<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> GridFunction {
        GridFunction {
            x: self.x.clone(),
            y: self.x.iter().zip(&self.y).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}
