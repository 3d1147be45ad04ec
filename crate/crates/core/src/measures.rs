//! One-dimensional probability measures, location-scale families, discrete
//! measures, Gaussian measures and the Jordan decomposition.
//!
//! A [`Measure1D`] always carries a tabulation on an ascending grid: a
//! normalized density, its CDF and a quantile table. Between grid points the
//! density is linear, so the CDF is piecewise quadratic and the quantile is
//! obtained by inverting that quadratic exactly. Members of a
//! [`LocationScaleFamily`] additionally keep their closed-form law, which is
//! used for point evaluations (`density_at`, `cdf_at`, `quantile`).

use alloc::string::ToString;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, Error, Result};
use crate::numeric::grid::{cell_index, linspace, trapezoid};
use crate::numeric::quadrature::{integrate_unit_interval, UnitIntervalRule};
use crate::numeric::special;

pub const DEFAULT_GRID_POINTS: usize = 1001;
/// Tail mass cut from unbounded supports when tabulating.
pub const DEFAULT_TAIL_MASS: f64 = 1e-8;

const MIN_MASS: f64 = 1e-14;

/// Piecewise-linear density with its exact piecewise-quadratic CDF.
#[derive(Debug, Clone, PartialEq)]
struct Tabulation {
    grid: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl Tabulation {
    fn from_density(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidInput("a density grid needs at least 2 points".to_string()));
        }
        if grid.len() != density.len() {
            return Err(Error::InvalidInput(alloc::format!(
                "grid has {} points but density has {}",
                grid.len(),
                density.len()
            )));
        }
        ensure_finite(&grid, "density grid")?;
        ensure_finite(&density, "density values")?;
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("density grid must be strictly ascending".to_string()));
        }
        if let Some(i) = density.iter().position(|&d| d < 0.0) {
            return Err(Error::InvalidInput(alloc::format!("negative density {} at index {i}", density[i])));
        }
        let mass = trapezoid(&grid, &density);
        if mass < MIN_MASS {
            return Err(Error::AllZeroDensity { integral: mass });
        }
        let density: Vec<f64> = density.iter().map(|d| d / mass).collect();
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..grid.len() {
            acc += 0.5 * (grid[i] - grid[i - 1]) * (density[i] + density[i - 1]);
            cdf.push(acc);
        }
        let total = acc;
        for c in cdf.iter_mut() {
            *c = (*c / total).min(1.0);
        }
        let last = cdf.len() - 1;
        cdf[last] = 1.0;
        Ok(Self { grid, density, cdf })
    }

    fn density_at(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x < self.grid[0] || x > self.grid[n - 1] {
            return 0.0;
        }
        let i = cell_index(&self.grid, x);
        let w = (x - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        self.density[i] + w * (self.density[i + 1] - self.density[i])
    }

    fn cdf_at(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= self.grid[n - 1] {
            return 1.0;
        }
        let i = cell_index(&self.grid, x);
        let dx = self.grid[i + 1] - self.grid[i];
        let s = x - self.grid[i];
        let (d0, d1) = (self.density[i], self.density[i + 1]);
        // Renormalize the cell so the local quadratic meets the tabulated CDF.
        let cell_mass = 0.5 * dx * (d0 + d1);
        let partial = d0 * s + 0.5 * (d1 - d0) * s * s / dx;
        let frac = if cell_mass > 0.0 { partial / cell_mass } else { 0.0 };
        (self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i])).clamp(0.0, 1.0)
    }

    /// Left-continuous generalized inverse `inf { x : F(x) >= u }`.
    fn quantile(&self, u: f64) -> f64 {
        let n = self.grid.len();
        if u <= 0.0 {
            let lo = self.cdf.iter().rposition(|&c| c <= 0.0).unwrap_or(0);
            return self.grid[lo];
        }
        if u >= 1.0 {
            let hi = self.cdf.iter().position(|&c| c >= 1.0).unwrap_or(n - 1);
            return self.grid[hi];
        }
        let j = self.cdf.partition_point(|&c| c < u);
        if j == 0 {
            return self.grid[0];
        }
        if j >= n {
            return self.grid[n - 1];
        }
        let k = j - 1;
        let (c0, c1) = (self.cdf[k], self.cdf[k + 1]);
        let dx = self.grid[k + 1] - self.grid[k];
        let (d0, d1) = (self.density[k], self.density[k + 1]);
        let cell_mass = 0.5 * dx * (d0 + d1);
        if cell_mass <= 0.0 || c1 <= c0 {
            return self.grid[k + 1];
        }
        // Target mass inside the cell in density units.
        let r = (u - c0) / (c1 - c0) * cell_mass;
        let a = 0.5 * (d1 - d0) / dx;
        let disc = (d0 * d0 + 4.0 * a * r).max(0.0);
        let denom = d0 + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * r / denom } else { dx };
        self.grid[k] + s.clamp(0.0, dx)
    }

    fn support_indices(&self) -> (usize, usize) {
        let n = self.grid.len();
        let lo = self.cdf.iter().rposition(|&c| c <= 0.0).unwrap_or(0);
        let hi = self.cdf.iter().position(|&c| c >= 1.0).unwrap_or(n - 1);
        (lo, hi.max(lo))
    }
}

/// Generator of a location-scale family given by a tabulated density.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGenerator {
    table: Tabulation,
}

impl GridGenerator {
    /// The density must be positive at interior grid points so that the
    /// generator CDF is strictly increasing.
    pub fn new(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let n = density.len();
        if n >= 3 && density[1..n - 1].iter().any(|&d| d <= 0.0) {
            return Err(Error::InvalidInput(
                "custom generator density must be positive on the interior of its grid".to_string(),
            ));
        }
        Ok(Self {
            table: Tabulation::from_density(grid, density)?,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.table.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.table.density
    }

    pub fn cdf(&self) -> &[f64] {
        &self.table.cdf
    }
}

/// Family of laws `G_{a,b}(x) = G((x - a) / b)` with a fixed generator `G`.
#[derive(Debug, Clone, PartialEq)]
pub enum LocationScaleFamily {
    Normal,
    Cauchy,
    Laplace,
    /// Scale family of `exp(-x) 1{x >= 0}`.
    ExponentialScale,
    CustomGrid(GridGenerator),
}

impl LocationScaleFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LocationScaleFamily::Normal => "normal",
            LocationScaleFamily::Cauchy => "cauchy",
            LocationScaleFamily::Laplace => "laplace",
            LocationScaleFamily::ExponentialScale => "exponential-scale",
            LocationScaleFamily::CustomGrid(_) => "custom-grid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "normal" => Some(LocationScaleFamily::Normal),
            "cauchy" => Some(LocationScaleFamily::Cauchy),
            "laplace" => Some(LocationScaleFamily::Laplace),
            "exponential-scale" => Some(LocationScaleFamily::ExponentialScale),
            _ => None,
        }
    }

    /// Whether `g(-t) = g(t)`. Custom generators are checked on their grid.
    pub fn is_symmetric(&self) -> bool {
        match self {
            LocationScaleFamily::Normal | LocationScaleFamily::Cauchy | LocationScaleFamily::Laplace => true,
            LocationScaleFamily::ExponentialScale => false,
            LocationScaleFamily::CustomGrid(gen) => {
                let g = &gen.table;
                let n = g.grid.len();
                (0..n).all(|i| {
                    (g.grid[i] + g.grid[n - 1 - i]).abs() <= 1e-12 * (1.0 + g.grid[i].abs())
                        && (g.density[i] - g.density[n - 1 - i]).abs() <= 1e-10 * (1.0 + g.density[i])
                })
            }
        }
    }

    pub fn generator_density(&self, t: f64) -> f64 {
        match self {
            LocationScaleFamily::Normal => special::normal_pdf(t),
            LocationScaleFamily::Cauchy => special::cauchy_pdf(t),
            LocationScaleFamily::Laplace => special::laplace_pdf(t),
            LocationScaleFamily::ExponentialScale => special::exponential_pdf(t),
            LocationScaleFamily::CustomGrid(gen) => gen.table.density_at(t),
        }
    }

    pub fn generator_cdf(&self, t: f64) -> f64 {
        match self {
            LocationScaleFamily::Normal => special::normal_cdf(t),
            LocationScaleFamily::Cauchy => special::cauchy_cdf(t),
            LocationScaleFamily::Laplace => special::laplace_cdf(t),
            LocationScaleFamily::ExponentialScale => special::exponential_cdf(t),
            LocationScaleFamily::CustomGrid(gen) => gen.table.cdf_at(t),
        }
    }

    pub fn generator_quantile(&self, u: f64) -> f64 {
        match self {
            LocationScaleFamily::Normal => special::normal_quantile(u),
            LocationScaleFamily::Cauchy => special::cauchy_quantile(u),
            LocationScaleFamily::Laplace => special::laplace_quantile(u),
            LocationScaleFamily::ExponentialScale => special::exponential_quantile(u),
            LocationScaleFamily::CustomGrid(gen) => gen.table.quantile(u),
        }
    }

    /// Range of the generator holding all but `tail_mass` of its mass.
    pub fn truncation(&self, tail_mass: f64) -> (f64, f64) {
        match self {
            LocationScaleFamily::ExponentialScale => (0.0, self.generator_quantile(1.0 - tail_mass)),
            LocationScaleFamily::CustomGrid(gen) => {
                let lo = gen.table.quantile(0.5 * tail_mass);
                let hi = gen.table.quantile(1.0 - 0.5 * tail_mass);
                if hi > lo {
                    (lo, hi)
                } else {
                    let n = gen.table.grid.len();
                    (gen.table.grid[0], gen.table.grid[n - 1])
                }
            }
            _ => (
                self.generator_quantile(0.5 * tail_mass),
                self.generator_quantile(1.0 - 0.5 * tail_mass),
            ),
        }
    }

    /// Raw moment `E[T^k]` of the generator, `None` when it does not exist.
    pub fn moment(&self, k: u32) -> Option<f64> {
        let factorial = |k: u32| (1..=k).map(|i| i as f64).product::<f64>();
        match self {
            LocationScaleFamily::Normal => Some(if k % 2 == 1 {
                0.0
            } else {
                (1..k).step_by(2).map(|i| i as f64).product()
            }),
            LocationScaleFamily::Cauchy => (k == 0).then_some(1.0),
            LocationScaleFamily::Laplace => Some(if k % 2 == 1 { 0.0 } else { factorial(k) }),
            LocationScaleFamily::ExponentialScale => Some(factorial(k)),
            LocationScaleFamily::CustomGrid(gen) => {
                integrate_unit_interval(|u| gen.table.quantile(u).powi(k as i32), &UnitIntervalRule::default()).ok()
            }
        }
    }

    /// Member `G_{a,b}` tabulated with the default grid.
    pub fn member(&self, a: f64, b: f64) -> Result<Measure1D> {
        self.member_with(a, b, DEFAULT_GRID_POINTS, DEFAULT_TAIL_MASS)
    }

    pub fn member_with(&self, a: f64, b: f64, points: usize, tail_mass: f64) -> Result<Measure1D> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteInput {
                what: "location-scale parameters",
            });
        }
        if b <= 0.0 {
            return Err(Error::NonPositiveScale(b));
        }
        let (t_lo, t_hi) = self.truncation(tail_mass);
        let grid = linspace(a + b * t_lo, a + b * t_hi, points.max(2));
        let density: Vec<f64> = grid.iter().map(|&x| self.generator_density((x - a) / b) / b).collect();
        let mut table = Tabulation::from_density(grid, density)?;
        let (c_lo, c_hi) = (self.generator_cdf(t_lo), self.generator_cdf(t_hi));
        if c_hi > c_lo {
            for (c, &x) in table.cdf.iter_mut().zip(&table.grid) {
                *c = ((self.generator_cdf((x - a) / b) - c_lo) / (c_hi - c_lo)).clamp(0.0, 1.0);
            }
        }
        let law = Law::LocationScale {
            family: self.clone(),
            a,
            b,
        };
        Ok(Measure1D::assemble(table, law))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Tabulated,
    LocationScale {
        family: LocationScaleFamily,
        a: f64,
        b: f64,
    },
}

/// Absolutely continuous probability measure on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure1D {
    table: Tabulation,
    quantile_levels: Vec<f64>,
    quantile_table: Vec<f64>,
    law: Law,
}

impl Measure1D {
    /// Normalizes a density sampled on an ascending grid.
    pub fn from_density(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        Ok(Self::assemble(Tabulation::from_density(grid, density)?, Law::Tabulated))
    }

    /// Uniform law on `[lo, hi]` tabulated with `points` grid points.
    pub fn uniform(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidInput(alloc::format!("empty interval [{lo}, {hi}]")));
        }
        let grid = linspace(lo, hi, points.max(2));
        let density = alloc::vec![1.0 / (hi - lo); grid.len()];
        Self::from_density(grid, density)
    }

    fn assemble(table: Tabulation, law: Law) -> Self {
        let m = table.grid.len();
        let quantile_levels: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) / m as f64).collect();
        let mut measure = Self {
            table,
            quantile_levels,
            quantile_table: Vec::new(),
            law,
        };
        measure.quantile_table = measure.quantile_levels.iter().map(|&u| measure.quantile(u)).collect();
        measure
    }

    pub fn grid(&self) -> &[f64] {
        &self.table.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.table.density
    }

    pub fn cdf(&self) -> &[f64] {
        &self.table.cdf
    }

    pub fn quantile_levels(&self) -> &[f64] {
        &self.quantile_levels
    }

    pub fn quantile_table(&self) -> &[f64] {
        &self.quantile_table
    }

    /// Location-scale parameters, when the measure is a family member.
    pub fn location_scale(&self) -> Option<(&LocationScaleFamily, f64, f64)> {
        match &self.law {
            Law::LocationScale { family, a, b } => Some((family, *a, *b)),
            Law::Tabulated => None,
        }
    }

    /// Same tabulation, with the closed-form law dropped.
    pub fn to_tabulated(&self) -> Measure1D {
        Self::assemble(self.table.clone(), Law::Tabulated)
    }

    pub fn density_at(&self, x: f64) -> f64 {
        match &self.law {
            Law::Tabulated => self.table.density_at(x),
            Law::LocationScale { family, a, b } => family.generator_density((x - a) / b) / b,
        }
    }

    pub fn cdf_at(&self, x: f64) -> f64 {
        match &self.law {
            Law::Tabulated => self.table.cdf_at(x),
            Law::LocationScale { family, a, b } => family.generator_cdf((x - a) / b),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match &self.law {
            Law::Tabulated => self.table.quantile(u),
            Law::LocationScale { family, a, b } => a + b * family.generator_quantile(u),
        }
    }

    /// First and last grid indices of the support.
    pub fn support_indices(&self) -> (usize, usize) {
        self.table.support_indices()
    }

    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.support_indices();
        (self.table.grid[lo], self.table.grid[hi])
    }

    /// Largest violation of the tabulation invariants (mass, CDF ends and
    /// monotonicity, quantile round trip), as an error naming the first failure.
    pub fn check_invariants(&self) -> Result<()> {
        let t = &self.table;
        if t.density.iter().any(|&d| d < 0.0) {
            return Err(Error::InvalidInput("negative density".to_string()));
        }
        let mass = trapezoid(&t.grid, &t.density);
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(alloc::format!("density integrates to {mass}")));
        }
        if t.cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("cdf decreases".to_string()));
        }
        if t.cdf[0] > 1e-9 || t.cdf[t.cdf.len() - 1] < 1.0 - 1e-9 {
            return Err(Error::InvalidInput("cdf does not span [0, 1]".to_string()));
        }
        if self.quantile_table.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("quantile table decreases".to_string()));
        }
        let m = self.quantile_levels.len() as f64;
        for (&u, &q) in self.quantile_levels.iter().zip(&self.quantile_table) {
            let back = self.cdf_at(q);
            if (back - u).abs() > 1.0 / m {
                return Err(Error::InvalidInput(alloc::format!("F(F^-1({u})) = {back}")));
            }
        }
        Ok(())
    }
}

/// Finitely supported measure in dimension 1, 2 or 3.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// `atoms` is row-major with `dim` coordinates per atom.
    pub fn new(dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidInput(alloc::format!("dimension {dim} not in 1..=3")));
        }
        if atoms.len() != dim * weights.len() {
            return Err(Error::InvalidInput(alloc::format!(
                "{} coordinates do not match {} atoms of dimension {dim}",
                atoms.len(),
                weights.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("discrete measure without atoms".to_string()));
        }
        ensure_finite(&atoms, "atom coordinates")?;
        ensure_finite(&weights, "atom weights")?;
        if let Some(i) = weights.iter().position(|&w| w <= 0.0) {
            return Err(Error::InvalidInput(alloc::format!("weight {} at atom {i} is not positive", weights[i])));
        }
        let measure = Self { dim, atoms, weights };
        let mut order: Vec<usize> = (0..measure.len()).collect();
        order.sort_by(|&i, &j| {
            measure
                .atom(i)
                .partial_cmp(measure.atom(j))
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        if order.windows(2).any(|w| measure.atom(w[0]) == measure.atom(w[1])) {
            return Err(Error::InvalidInput("atoms must be distinct".to_string()));
        }
        Ok(measure)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.atoms.clone(), self.weights.iter().map(|w| w * factor).collect())
    }
}

/// Multivariate normal law `N(mean, covariance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianMeasure {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::InvalidInput(alloc::format!(
                "mean of length {d} with a {}x{} covariance",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        ensure_finite(mean.as_slice(), "gaussian mean")?;
        ensure_finite(covariance.as_slice(), "gaussian covariance")?;
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidInput(alloc::format!("covariance asymmetric by {asym:e}")));
        }
        let min_eigenvalue = covariance.clone().symmetric_eigen().eigenvalues.min();
        if min_eigenvalue <= 1e-12 {
            return Err(Error::NotSpd { min_eigenvalue });
        }
        Ok(Self { mean, covariance })
    }

    /// `N(mean, variance)` on the real line.
    pub fn univariate(mean: f64, variance: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, variance))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// Pointwise split of `mu - nu` into mutually singular parts on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanDecomposition {
    pub grid: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub common_mass: f64,
}

impl JordanDecomposition {
    pub fn leftover_mass(&self) -> f64 {
        1.0 - self.common_mass
    }
}

/// Cap on shared-grid size used by [`jordan_decompose`].
pub const MAX_SHARED_GRID: usize = 1_000_000;

pub fn jordan_decompose(mu: &Measure1D, nu: &Measure1D) -> Result<JordanDecomposition> {
    let spacing = |m: &Measure1D| {
        let g = m.grid();
        g.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    };
    let step = spacing(mu).min(spacing(nu));
    let lo = mu.grid()[0].min(nu.grid()[0]);
    let hi = mu.grid()[mu.grid().len() - 1].max(nu.grid()[nu.grid().len() - 1]);
    // Snap ratios within rounding of an integer so aligned grids stay aligned.
    let ratio = (hi - lo) / step;
    let cells = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    if !cells.is_finite() || cells + 1.0 > MAX_SHARED_GRID as f64 {
        return Err(Error::GridMismatch(alloc::format!(
            "shared grid over [{lo}, {hi}] at spacing {step:e} exceeds {MAX_SHARED_GRID} points"
        )));
    }
    let grid = linspace(lo, hi, cells as usize + 1);
    let resample = |m: &Measure1D| -> Result<Vec<f64>> {
        let d: Vec<f64> = grid.iter().map(|&x| m.density_at(x)).collect();
        let mass = trapezoid(&grid, &d);
        if !(mass > MIN_MASS) {
            return Err(Error::GridMismatch("a measure lost its mass when resampled".to_string()));
        }
        Ok(d.into_iter().map(|v| v / mass).collect())
    };
    let dmu = resample(mu)?;
    let dnu = resample(nu)?;
    let mut plus: Vec<f64> = dmu.iter().zip(&dnu).map(|(a, b)| (a - b).max(0.0)).collect();
    let mut minus: Vec<f64> = dmu.iter().zip(&dnu).map(|(a, b)| (b - a).max(0.0)).collect();
    let mass_plus = trapezoid(&grid, &plus);
    let mass_minus = trapezoid(&grid, &minus);
    let target = 0.5 * (mass_plus + mass_minus);
    if mass_plus > 0.0 && mass_minus > 0.0 {
        plus.iter_mut().for_each(|v| *v *= target / mass_plus);
        minus.iter_mut().for_each(|v| *v *= target / mass_minus);
    } else {
        plus.iter_mut().for_each(|v| *v = 0.0);
        minus.iter_mut().for_each(|v| *v = 0.0);
    }
    let leftover = if mass_plus > 0.0 && mass_minus > 0.0 { target } else { 0.0 };
    Ok(JordanDecomposition {
        grid,
        plus,
        minus,
        common_mass: 1.0 - leftover,
    })
}

/// Equal-mass atoms at the quantile levels `(i - 1/2) / n`.
pub fn discretize(mu: &Measure1D, n: usize) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::InvalidInput("discretization needs at least one atom".to_string()));
    }
    let atoms: Vec<f64> = (1..=n).map(|i| mu.quantile((i as f64 - 0.5) / n as f64)).collect();
    DiscreteMeasure::new(1, atoms, alloc::vec![1.0 / n as f64; n])
}

/// Discretizes `mu` and embeds it along the line `x -> x u + r`.
pub fn affine_pushforward(mu: &Measure1D, direction: &[f64], base: &[f64], n: usize) -> Result<DiscreteMeasure> {
    let d = direction.len();
    if base.len() != d {
        return Err(Error::InvalidInput(alloc::format!(
            "direction has dimension {d} but base has {}",
            base.len()
        )));
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection { norm });
    }
    let line = discretize(mu, n)?;
    let mut atoms = Vec::with_capacity(n * d);
    for &x in line.atoms() {
        atoms.extend(direction.iter().zip(base).map(|(u, r)| x * u + r));
    }
    DiscreteMeasure::new(d, atoms, line.weights().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_cdf_and_quantile_are_identities() {
        let m = Measure1D::uniform(0.0, 1.0, 101).unwrap();
        m.check_invariants().unwrap();
        for &x in &[0.0, 0.123, 0.5, 0.999] {
            assert!((m.cdf_at(x) - x).abs() < 1e-12);
            assert!((m.quantile(x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn triangular_median_is_zero() {
        let grid = linspace(-1.0, 1.0, 1001);
        let density = grid.iter().map(|x| 1.0 - x.abs()).collect();
        let m = Measure1D::from_density(grid, density).unwrap();
        assert!(m.quantile(0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_density_is_rejected() {
        let err = Measure1D::from_density(linspace(0.0, 1.0, 5), alloc::vec![0.0; 5]).unwrap_err();
        assert!(matches!(err, Error::AllZeroDensity { .. }));
        let err = Measure1D::from_density(alloc::vec![0.0, 1.0], alloc::vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteInput { .. }));
    }

    #[test]
    fn flat_cdf_stretch_resolves_to_left_endpoint() {
        // mass on [0,1] and [2,3], nothing in between
        let grid = linspace(0.0, 3.0, 7);
        let density = alloc::vec![1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0];
        let m = Measure1D::from_density(grid, density).unwrap();
        let half = m.quantile(0.5);
        assert!(half <= 1.5 + 1e-12, "{half}");
        assert!(m.cdf_at(half) >= 0.5 - 1e-12);
    }

    #[test]
    fn member_rejects_nonpositive_scale() {
        let err = LocationScaleFamily::Normal.member(0.0, 0.0).unwrap_err();
        assert_eq!(err, Error::NonPositiveScale(0.0));
    }

    #[test]
    fn normal_member_quantiles() {
        let m = LocationScaleFamily::Normal.member(1.0, 2.0).unwrap();
        m.check_invariants().unwrap();
        assert!((m.quantile(0.5) - 1.0).abs() < 1e-14);
        for &u in m.quantile_levels() {
            let expected = 1.0 + 2.0 * special::normal_quantile(u);
            assert!((m.quantile(u) - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn generator_moments() {
        assert_eq!(LocationScaleFamily::Normal.moment(4), Some(3.0));
        assert_eq!(LocationScaleFamily::Normal.moment(6), Some(15.0));
        assert_eq!(LocationScaleFamily::Laplace.moment(2), Some(2.0));
        assert_eq!(LocationScaleFamily::ExponentialScale.moment(3), Some(6.0));
        assert_eq!(LocationScaleFamily::Cauchy.moment(2), None);
    }

    #[test]
    fn discrete_measure_rejects_duplicates() {
        assert!(DiscreteMeasure::new(1, alloc::vec![0.0, 0.0], alloc::vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(2, alloc::vec![0.0, 1.0, 0.0, 2.0], alloc::vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn gaussian_rejects_singular_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let err = GaussianMeasure::new(DVector::zeros(2), cov).unwrap_err();
        assert!(matches!(err, Error::NotSpd { .. }));
    }

    #[test]
    fn affine_pushforward_rejects_long_direction() {
        let mu = Measure1D::uniform(0.0, 1.0, 11).unwrap();
        let err = affine_pushforward(&mu, &[1.0, 1.0], &[0.0, 0.0], 4).unwrap_err();
        assert!(matches!(err, Error::NonUnitDirection { .. }));
    }
}
