//! Forward optimal transport.

pub mod concave;
pub mod gaussian;
pub mod lp;
pub mod quantile;

pub use concave::{concave_ot_1d, ConcaveOt};
pub use gaussian::{gaussian_ot, GaussianOt};
pub use lp::{ot_lp, Coupling, LpSolution, MAX_LP_CELLS};
pub use quantile::{
    monotone_map, ot_cost_quantile, potential_derivative_1d, potentials_1d, quantile_cost_with, Potentials1D,
};
