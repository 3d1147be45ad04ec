//! Cost reconstruction from observed OT information.
//!
//! Maps and potential gradients determine the graph of `∇h*` (convex case)
//! or of `(l')^{-1}` (concave case) on the set of observed gradients; the
//! cost follows by inversion and integration, up to one additive constant.
//! OT values over a location-scale family determine `h` itself through the
//! g-transform.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forward::quantile::quantile_cost_with;
use crate::measures::{LocationScaleFamily, Measure1D};
use crate::numeric::isotonic::{isotonic_decreasing, isotonic_increasing};
use crate::numeric::GridFunction;
use crate::transforms::{
    alpha_locscale, deconvolve_location, post_laplace_invert, Deconvolution, GTransformSamples, PostEstimate,
    SpectralRegularization,
};
use crate::cost::CostSpec;

/// Largest monotonicity violation that is silently projected away.
pub const MONOTONE_TOL: f64 = 1e-6;
/// Points whose ordinates agree to this are merged.
const DUPLICATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Convex,
    Concave,
}

/// Observed pairs `(y, z)` with `z = ∇h*(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateGraph {
    pub kind: GraphKind,
    /// Sorted by `y`.
    pub points: Vec<(f64, f64)>,
}

impl ConjugateGraph {
    pub fn new(kind: GraphKind, mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(y, z)| !(y.is_finite() && z.is_finite())) {
            return Err(Error::NonFiniteInput { what: "graph points" });
        }
        points.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        Ok(Self { kind, points })
    }

    /// Hull of the observed gradients.
    pub fn identified_domain(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.0, self.points.last()?.0))
    }

    /// Merges the points of several graphs; overlapping ordinates are averaged
    /// by [`assemble_convex_cost`] and their spread reported.
    pub fn merge(graphs: &[ConjugateGraph]) -> Result<Self> {
        let kind = graphs.first().map_or(GraphKind::Convex, |g| g.kind);
        if graphs.iter().any(|g| g.kind != kind) {
            return Err(Error::InvalidInput("cannot merge convex and concave graphs".into()));
        }
        Self::new(kind, graphs.iter().flat_map(|g| g.points.iter().copied()).collect())
    }
}

/// Graph `(f'(x_i), x_i - T(x_i))` over the interior sample points.
pub fn conjugate_graph_from_map(map: &GridFunction, fprime: &GridFunction, kind: GraphKind) -> Result<ConjugateGraph> {
    if map.len() != fprime.len() {
        return Err(Error::MisalignedSamples(alloc::format!(
            "{} map samples against {} derivative samples",
            map.len(),
            fprime.len()
        )));
    }
    if let Some(i) = (0..map.len()).find(|&i| (map.x()[i] - fprime.x()[i]).abs() > 1e-12 * (1.0 + map.x()[i].abs())) {
        return Err(Error::MisalignedSamples(alloc::format!(
            "abscissa {i} differs: {} vs {}",
            map.x()[i],
            fprime.x()[i]
        )));
    }
    let n = map.len();
    let interior = if n > 2 { 1..n - 1 } else { 0..n };
    let points = interior
        .map(|i| (fprime.y()[i], map.x()[i] - map.y()[i]))
        .collect();
    ConjugateGraph::new(kind, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMethod {
    ValueMatch,
    OriginPin,
    Unresolved,
}

impl KMethod {
    pub fn name(self) -> &'static str {
        match self {
            KMethod::ValueMatch => "value-match",
            KMethod::OriginPin => "origin-pin",
            KMethod::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecoveryDiagnostics {
    /// Largest change made by the isotonic projection.
    pub isotonic_projection_distance: f64,
    /// Recomputed OT value minus the anchor value.
    pub anchor_residual: Option<f64>,
    /// Largest spread of ordinates merged at a repeated abscissa.
    pub merged_spread: f64,
}

/// A recovered cost, defined only on its identified domain.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredCost {
    /// `h'` (or `l'`) over the identified difference range.
    pub hprime: GridFunction,
    pub h: GridFunction,
    /// Value of the recovered cost at the origin relative to the class
    /// representative (zero when pinned there).
    pub k: f64,
    pub k_method: KMethod,
    /// Hull of the observed gradients.
    pub identified_domain: (f64, f64),
    pub diagnostics: RecoveryDiagnostics,
}

impl RecoveredCost {
    /// `h(t)`, or `None` outside the identified range.
    pub fn h_at(&self, t: f64) -> Option<f64> {
        self.h.eval_within(t)
    }

    pub fn hprime_at(&self, t: f64) -> Option<f64> {
        self.hprime.eval_within(t)
    }
}

/// OT value the recovered cost must reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueAnchor {
    pub mu: Measure1D,
    pub nu: Measure1D,
    pub alpha: f64,
}

/// Averages ordinates of points whose abscissae agree; returns the spread.
fn merge_duplicates(points: &[(f64, f64)]) -> (Vec<(f64, f64)>, f64) {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    let mut spread: f64 = 0.0;
    let mut i = 0;
    while i < points.len() {
        let mut j = i + 1;
        while j < points.len() && (points[j].0 - points[i].0).abs() <= DUPLICATE_TOL {
            j += 1;
        }
        let group = &points[i..j];
        let mean = group.iter().map(|p| p.1).sum::<f64>() / group.len() as f64;
        let (lo, hi) = group
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
        spread = spread.max(hi - lo);
        out.push((group[0].0, mean));
        i = j;
    }
    (out, spread)
}

/// Largest drop `max_{j<i} z_j - z_i` of a sequence meant to increase.
fn worst_violation(z: &[f64]) -> Option<(usize, f64)> {
    let mut running = f64::NEG_INFINITY;
    let mut worst: Option<(usize, f64)> = None;
    for (i, &v) in z.iter().enumerate() {
        let drop = running - v;
        if drop > 0.0 && worst.is_none_or(|(_, w)| drop > w) {
            worst = Some((i, drop));
        }
        running = running.max(v);
    }
    worst
}

/// Inverts a non-decreasing sampled relation `(y_i, z_i)` into `y` as a
/// function of strictly increasing `z`, pooling flat stretches.
fn invert_monotone(y: &[f64], z: &[f64]) -> Result<GridFunction> {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < z.len() {
        let mut j = i + 1;
        while j < z.len() && z[j] - z[i] <= DUPLICATE_TOL * (1.0 + z[i].abs()) {
            j += 1;
        }
        xs.push(z[i]);
        ys.push(y[i..j].iter().sum::<f64>() / (j - i) as f64);
        i = j;
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateGraph("the inverse collapses to a single point".into()));
    }
    GridFunction::new(xs, ys)
}

fn monotone_fit(values: &[f64], increasing: bool) -> Result<(Vec<f64>, f64)> {
    let oriented: Vec<f64> = if increasing {
        values.to_vec()
    } else {
        values.iter().map(|v| -v).collect()
    };
    if let Some((index, violation)) = worst_violation(&oriented) {
        if violation > MONOTONE_TOL {
            return Err(Error::NonMonotoneGraph { index, violation });
        }
    }
    let fit = if increasing {
        isotonic_increasing(values, None)
    } else {
        isotonic_decreasing(values, None)
    };
    let distance = fit
        .iter()
        .zip(values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((fit, distance))
}

/// Inverts the graph of `∇h* = (h')^{-1}` into `h'`, integrates it and
/// resolves the additive constant.
pub fn assemble_convex_cost(graph: &ConjugateGraph, anchor: Option<&ValueAnchor>) -> Result<RecoveredCost> {
    if graph.kind != GraphKind::Convex {
        return Err(Error::InvalidInput("assemble_convex_cost needs a convex graph".into()));
    }
    let (points, merged_spread) = merge_duplicates(&graph.points);
    if points.len() < 2 {
        return Err(Error::DegenerateGraph(alloc::format!(
            "{} distinct gradient value(s)",
            points.len()
        )));
    }
    let y: Vec<f64> = points.iter().map(|p| p.0).collect();
    let z: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (z_fit, projection) = monotone_fit(&z, true)?;
    let hprime = invert_monotone(&y, &z_fit)?;
    let (lo, hi) = hprime.domain();

    let origin_inside = lo <= 0.0 && hi >= 0.0;
    let base = if origin_inside {
        hprime.antiderivative(0.0, 0.0)
    } else {
        hprime.antiderivative(lo, 0.0)
    };
    let mut diagnostics = RecoveryDiagnostics {
        isotonic_projection_distance: projection,
        anchor_residual: None,
        merged_spread,
    };
    let (h, k, k_method) = match anchor {
        Some(anchor) => {
            let base_value = quantile_cost_with(|t| base.eval(t), &anchor.mu, &anchor.nu)?;
            let k = anchor.alpha - base_value;
            if !k.is_finite() {
                return Err(Error::AnchorInfeasible(alloc::format!(
                    "base representative gives OT value {base_value}"
                )));
            }
            let h = base.map_values(|_, v| v + k);
            let recomputed = quantile_cost_with(|t| h.eval(t), &anchor.mu, &anchor.nu)?;
            diagnostics.anchor_residual = Some(recomputed - anchor.alpha);
            (h, k, KMethod::ValueMatch)
        }
        None if origin_inside => (base, 0.0, KMethod::OriginPin),
        None => (base, 0.0, KMethod::Unresolved),
    };
    Ok(RecoveredCost {
        hprime,
        h,
        k,
        k_method,
        identified_domain: (y[0], y[y.len() - 1]),
        diagnostics,
    })
}

/// Antiderivative from the left end, integrating each cell exactly for the
/// power law through its end values. Concave slopes blow up like `t^q` near
/// the origin, where the trapezoid rule overshoots badly.
fn power_law_antiderivative(f: &GridFunction, start: f64) -> Result<GridFunction> {
    let (x, v) = (f.x(), f.y());
    let mut out = Vec::with_capacity(x.len());
    out.push(start);
    for i in 1..x.len() {
        let (t0, t1, v0, v1) = (x[i - 1], x[i], v[i - 1], v[i]);
        let cell = if t0 > 0.0 && v0 > 0.0 && v1 > 0.0 && v0 != v1 {
            let ratio = t1 / t0;
            let q = (v1 / v0).ln() / ratio.ln();
            if (q + 1.0).abs() > 1e-9 {
                v0 * t0 / (q + 1.0) * (ratio.powf(q + 1.0) - 1.0)
            } else {
                v0 * t0 * ratio.ln()
            }
        } else {
            0.5 * (v0 + v1) * (t1 - t0)
        };
        out.push(out[i - 1] + cell);
    }
    GridFunction::new(x.to_vec(), out)
}

/// Fraction of the largest observed distance below which the graph is taken
/// to reach the origin.
pub const ORIGIN_REACH: f64 = 0.02;

/// Recovers `l'` (and `l`) from a concave graph `z = (l')^{-1}(|y|) sign(y)`.
pub fn recover_concave(graph: &ConjugateGraph) -> Result<RecoveredCost> {
    if graph.kind != GraphKind::Concave {
        return Err(Error::InvalidInput("recover_concave needs a concave graph".into()));
    }
    for (index, &(y, z)) in graph.points.iter().enumerate() {
        let value = z * y.signum();
        if value < -1e-8 {
            return Err(Error::SignInconsistent { index, value });
        }
    }
    let mut pairs: Vec<(f64, f64)> = graph.points.iter().map(|&(y, z)| (y.abs(), z.abs())).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let (pairs, merged_spread) = merge_duplicates(&pairs);
    if pairs.len() < 2 {
        return Err(Error::DegenerateGraph(alloc::format!("{} distinct slope value(s)", pairs.len())));
    }
    let s: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let t: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    // (l')^{-1} decreases in the slope.
    let (t_fit, projection) = monotone_fit(&t, false)?;
    // l' as a function of ascending distance.
    let t_asc: Vec<f64> = t_fit.iter().rev().copied().collect();
    let s_desc: Vec<f64> = s.iter().rev().copied().collect();
    let lprime = invert_monotone(&s_desc, &t_asc)?;
    let (t_min, t_max) = lprime.domain();

    let reaches_origin = t_min <= ORIGIN_REACH * t_max;
    let (l, k_method) = if reaches_origin {
        // l(t_min) from a power-law fit of l' on the first cells.
        let (x, v) = (lprime.x(), lprime.y());
        let q = if x[0] > 0.0 && x[1] > x[0] && v[0] > 0.0 && v[1] > 0.0 {
            ((v[1] / v[0]).ln() / (x[1] / x[0]).ln()).clamp(-0.99, 0.0)
        } else {
            0.0
        };
        let start = t_min * lprime.y()[0] / (q + 1.0);
        (power_law_antiderivative(&lprime, start)?, KMethod::OriginPin)
    } else {
        (power_law_antiderivative(&lprime, 0.0)?, KMethod::Unresolved)
    };
    Ok(RecoveredCost {
        hprime: lprime,
        h: l,
        k: 0.0,
        k_method,
        identified_domain: (s[0], s[s.len() - 1]),
        diagnostics: RecoveryDiagnostics {
            isotonic_projection_distance: projection,
            anchor_residual: None,
            merged_spread,
        },
    })
}

/// Source of OT values `α(a, b) = α_h(G_{a,b}, G)`.
pub trait ValueSurface {
    fn alpha(&self, a: f64, b: f64) -> Result<f64>;
}

impl ValueSurface for GTransformSamples {
    fn alpha(&self, a: f64, b: f64) -> Result<f64> {
        self.get(a, b).ok_or(Error::MissingSample { a, b })
    }
}

/// Values computed on demand from a known cost.
#[derive(Debug, Clone)]
pub struct CostSurface {
    pub cost: CostSpec,
    pub family: LocationScaleFamily,
}

impl ValueSurface for CostSurface {
    fn alpha(&self, a: f64, b: f64) -> Result<f64> {
        alpha_locscale(|t| self.cost.value(t), &self.family, a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueMethod {
    /// Deconvolve the slice at fixed `b` over the `a` grid.
    Fourier { b: f64, a: Vec<f64>, reg: SpectralRegularization },
    /// Post inversion of the `a = 0` section at the given points `x > 0`.
    Post { x: Vec<f64>, order: usize },
}

impl ValueMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ValueMethod::Fourier { .. } => "fourier",
            ValueMethod::Post { .. } => "post",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueRecovery {
    pub h: GridFunction,
    pub deconvolution: Option<Deconvolution>,
    pub post: Vec<PostEstimate>,
    pub notes: Vec<String>,
}

/// Recovers `h` (or a difference of costs, by linearity) from OT values.
pub fn recover_from_values_locscale(
    surface: &dyn ValueSurface,
    family: &LocationScaleFamily,
    method: &ValueMethod,
) -> Result<ValueRecovery> {
    match method {
        ValueMethod::Fourier { b, a, reg } => {
            if !family.is_symmetric() || matches!(family, LocationScaleFamily::Cauchy) {
                return Err(Error::MethodFamilyMismatch {
                    method: "fourier",
                    family: family.name(),
                });
            }
            if *b == 1.0 {
                return Err(Error::InvalidInput("b = 1 carries no kernel".into()));
            }
            let scale = (b - 1.0).abs();
            let data = a
                .iter()
                .map(|&ai| Ok(scale * surface.alpha(ai, *b)?))
                .collect::<Result<Vec<f64>>>()?;
            let values = GridFunction::new(a.clone(), data)?;
            let dec = deconvolve_location(&values, family, scale, reg)?;
            Ok(ValueRecovery {
                h: dec.h.clone(),
                deconvolution: Some(dec),
                post: Vec::new(),
                notes: alloc::vec!["recovered within the retained spectral band".into()],
            })
        }
        ValueMethod::Post { x, order } => {
            if !matches!(family, LocationScaleFamily::Laplace | LocationScaleFamily::ExponentialScale) {
                return Err(Error::MethodFamilyMismatch {
                    method: "post",
                    family: family.name(),
                });
            }
            // α(0, 1 + 1/s) = s L(s), L the Laplace transform of h on (0, ∞).
            let mut failure = None;
            let mut estimates = Vec::with_capacity(x.len());
            for &xi in x {
                let est = post_laplace_invert(
                    |s| match surface.alpha(0.0, 1.0 + 1.0 / s) {
                        Ok(v) => v / s,
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    xi,
                    *order,
                );
                if let Some(e) = failure.take() {
                    return Err(e);
                }
                estimates.push(est?);
            }
            let h = GridFunction::new(x.clone(), estimates.iter().map(|e| e.value).collect())?;
            let mut notes = alloc::vec![String::from("values on x > 0 of a cost assumed symmetric")];
            if matches!(family, LocationScaleFamily::Laplace) {
                notes.push("two-sided generator: h(x) and h(-x) are averaged".into());
            }
            Ok(ValueRecovery {
                h,
                deconvolution: None,
                post: estimates,
                notes,
            })
        }
    }
}
