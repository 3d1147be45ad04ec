//! Gauss–Legendre rules, composite and adaptive integration, and the
//! endpoint-refined integrator used for quantile integrals over (0, 1).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// `(∫ f, ∫ |f|)` over `[a, b]` from one set of evaluations.
    fn integrate_with_magnitude<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> (f64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (mut signed, mut magnitude) = (0.0, 0.0);
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            let v = w * f(mid + half * t);
            signed += v;
            magnitude += v.abs();
        }
        (signed * half, magnitude * half.abs())
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                let hi = if k + 1 == panels { b } else { lo + h };
                self.integrate(&mut f, lo, hi)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}

/// Settings for [`integrate_unit_interval`].
#[derive(Debug, Clone, Copy)]
pub struct UnitIntervalRule {
    pub nodes_per_panel: usize,
    pub panels: usize,
    /// Width of the endpoint strips excluded from the uniform panels.
    pub endpoint_strip: f64,
    /// Factor by which successive endpoint panels shrink.
    pub strip_shrink: f64,
    pub rel_tol: f64,
    pub max_refinements: usize,
}

impl Default for UnitIntervalRule {
    fn default() -> Self {
        Self {
            nodes_per_panel: 64,
            panels: 16,
            endpoint_strip: 1.0 / 64.0,
            strip_shrink: 0.25,
            rel_tol: 1e-10,
            max_refinements: 40,
        }
    }
}

/// Integral over `(0, 1)` of a function that may blow up at either end.
///
/// Uniform panels cover `[s, 1 - s]`; each endpoint strip is then consumed
/// by panels shrinking by `strip_shrink` per level until one level
/// contributes less than `rel_tol` of the running `∫ |f|`, so integrands
/// that nearly cancel stop as early as their magnitude warrants. Next to 1
/// the strip cannot shrink past floating-point resolution; there a steadily
/// decaying tail is extrapolated and anything else counts as divergent.
pub fn integrate_unit_interval<F: FnMut(f64) -> f64>(mut f: F, rule: &UnitIntervalRule) -> Result<f64> {
    let gl = GaussLegendre::new(rule.nodes_per_panel);
    let s = rule.endpoint_strip;
    let h = (1.0 - 2.0 * s) / rule.panels as f64;
    let (mut total, mut magnitude) = (0.0, 0.0);
    for k in 0..rule.panels {
        let lo = s + h * k as f64;
        let hi = if k + 1 == rule.panels { 1.0 - s } else { lo + h };
        let (v, m) = gl.integrate_with_magnitude(&mut f, lo, hi);
        total += v;
        magnitude += m;
    }
    if !total.is_finite() {
        return Err(Error::DivergentIntegral { refinements: 0 });
    }
    // (width, previous contribution, finished) for the strips at 0 and 1.
    let mut sides = [(s, f64::NAN, false); 2];
    for level in 0..rule.max_refinements {
        for (k, (width, previous, done)) in sides.iter_mut().enumerate() {
            if *done {
                continue;
            }
            let inner = *width * rule.strip_shrink;
            let (v, m) = if k == 0 {
                gl.integrate_with_magnitude(&mut f, inner, *width)
            } else {
                gl.integrate_with_magnitude(&mut f, 1.0 - *width, 1.0 - inner)
            };
            if !v.is_finite() {
                return Err(Error::DivergentIntegral { refinements: level + 1 });
            }
            total += v;
            magnitude += m;
            let ratio = v / *previous;
            let decaying = ratio.is_finite() && ratio > 0.0 && ratio < 0.9;
            let small = m <= rule.rel_tol * magnitude;
            let at_floor = k == 1 && inner <= RESOLUTION_FLOOR;
            if small || at_floor {
                if !small && !decaying {
                    return Err(Error::DivergentIntegral { refinements: level + 1 });
                }
                if decaying {
                    total += v * ratio / (1.0 - ratio);
                }
                *done = true;
            }
            *previous = v;
            *width = inner;
        }
        if sides.iter().all(|side| side.2) {
            return Ok(total);
        }
    }
    Err(Error::DivergentIntegral {
        refinements: rule.max_refinements,
    })
}

/// Narrowest strip next to 1 whose Gauss nodes are still well resolved.
const RESOLUTION_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Adaptive Gauss–Legendre integration by panel bisection.
///
/// A panel is accepted when the 32-point estimate and the sum of the two
/// half-panel estimates agree within `max(abs_tol * width / (b - a), rel_tol * |estimate|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let gl = GaussLegendre::new(32);
    let span = (b - a).abs();
    let mut stack: Vec<(f64, f64, f64, usize)> = Vec::new();
    let initial = 8;
    let h = (b - a) / initial as f64;
    for k in (0..initial).rev() {
        let lo = a + h * k as f64;
        let hi = if k + 1 == initial { b } else { lo + h };
        let est = gl.integrate(&mut f, lo, hi);
        stack.push((lo, hi, est, 0));
    }
    let mut total = 0.0;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl.integrate(&mut f, lo, mid);
        let right = gl.integrate(&mut f, mid, hi);
        let refined = left + right;
        let tol = (abs_tol * (hi - lo).abs() / span).max(rel_tol * refined.abs());
        if (refined - est).abs() <= tol || depth >= 40 {
            total += refined;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    total
}
