use alloc::string::String;

/// Failures raised by the numerical core.
///
/// Variants split into two groups: input/validation problems (the caller
/// handed over something that violates a contract) and numerical failures
/// (the inputs were well formed but a computation could not finish within
/// its tolerances). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("density integrates to {integral:e}, nothing to normalize")]
    AllZeroDensity { integral: f64 },

    #[error("non-finite value in {what}")]
    NonFiniteInput { what: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("cannot place measures on a shared grid: {0}")]
    GridMismatch(String),

    #[error("direction is not a unit vector (norm {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("quantile integral did not converge after {refinements} endpoint refinements")]
    DivergentIntegral { refinements: usize },

    #[error("total masses differ: {row_mass} vs {col_mass}")]
    Infeasible { row_mass: f64, col_mass: f64 },

    #[error("transport problem of size {rows}x{cols} exceeds the cap of {cap} cells")]
    SizeExceeded { rows: usize, cols: usize, cap: usize },

    #[error("matrix is not symmetric positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd { min_eigenvalue: f64 },

    #[error("{clamped_fraction:.3} of the kernel spectrum falls below the cutoff")]
    KernelSpectrumDegenerate { clamped_fraction: f64 },

    #[error("Post inversion unstable: order {order} gives {low}, order {high_order} gives {high}")]
    UnstableDerivative {
        order: usize,
        high_order: usize,
        low: f64,
        high: f64,
    },

    #[error("map and derivative samples are not aligned: {0}")]
    MisalignedSamples(String),

    #[error("conjugate graph is degenerate: {0}")]
    DegenerateGraph(String),

    #[error("conjugate graph violates monotonicity at index {index} by {violation:e}")]
    NonMonotoneGraph { index: usize, violation: f64 },

    #[error("value anchor cannot be matched: {0}")]
    AnchorInfeasible(String),

    #[error("concave graph point {index} has z*sign(y) = {value:e} < 0")]
    SignInconsistent { index: usize, value: f64 },

    #[error("method {method} does not apply to family {family}")]
    MethodFamilyMismatch {
        method: &'static str,
        family: &'static str,
    },

    #[error("perturbed density is negative ({value:e}) at grid index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("value sample missing at a = {a}, b = {b}")]
    MissingSample { a: f64, b: f64 },
}

impl Error {
    /// Stable identifier, used in machine-readable diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::AllZeroDensity { .. } => "AllZeroDensity",
            Error::NonFiniteInput { .. } => "NonFiniteInput",
            Error::InvalidInput(_) => "InvalidInput",
            Error::NonPositiveScale(_) => "NonPositiveScale",
            Error::GridMismatch(_) => "GridMismatch",
            Error::NonUnitDirection { .. } => "NonUnitDirection",
            Error::DivergentIntegral { .. } => "DivergentIntegral",
            Error::Infeasible { .. } => "Infeasible",
            Error::SizeExceeded { .. } => "SizeExceeded",
            Error::NotSpd { .. } => "NotSPD",
            Error::KernelSpectrumDegenerate { .. } => "KernelSpectrumDegenerate",
            Error::UnstableDerivative { .. } => "UnstableDerivative",
            Error::MisalignedSamples(_) => "MisalignedSamples",
            Error::DegenerateGraph(_) => "DegenerateGraph",
            Error::NonMonotoneGraph { .. } => "NonMonotoneGraph",
            Error::AnchorInfeasible(_) => "AnchorInfeasible",
            Error::SignInconsistent { .. } => "SignInconsistent",
            Error::MethodFamilyMismatch { .. } => "MethodFamilyMismatch",
            Error::NegativeDensity { .. } => "NegativeDensity",
            Error::Unsupported(_) => "Unsupported",
            Error::MissingSample { .. } => "MissingSample",
        }
    }

    /// True for failures of a computation on valid inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DivergentIntegral { .. }
                | Error::KernelSpectrumDegenerate { .. }
                | Error::UnstableDerivative { .. }
                | Error::AnchorInfeasible(_)
                | Error::DegenerateGraph(_)
                | Error::NonMonotoneGraph { .. }
                | Error::SignInconsistent { .. }
                | Error::NegativeDensity { .. }
                | Error::MissingSample { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput { what })
    }
}
