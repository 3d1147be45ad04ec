//! Forward and inverse optimal transport on the real line.
//!
//! The crate covers three directions:
//!
//! - **forward**: OT values, monotone maps and dual potentials for convex
//!   costs of the difference `h(x - y)` through quantile functions, the
//!   Gaussian closed form, concave costs of the distance through the Jordan
//!   decomposition, and an exact transportation simplex used as an oracle;
//! - **inverse**: reconstruction of `h'` (or `(l')^{-1}` for concave costs)
//!   from maps and potential gradients, and of `h` itself from OT values over
//!   a location-scale family via the g-transform;
//! - **identifiability**: counterexample search between candidate costs,
//!   certified plan-only non-identifiability, and first-variation checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cost;
pub mod error;
pub mod forward;
pub mod identify;
pub mod measures;
pub mod numeric;
pub mod recovery;
pub mod transforms;

pub use cost::{CostKind, CostSpec};
pub use error::{Error, Result};
pub use measures::{DiscreteMeasure, GaussianMeasure, LocationScaleFamily, Measure1D};
pub use numeric::GridFunction;
