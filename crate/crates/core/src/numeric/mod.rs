//! Numerical building blocks shared by the OT modules.

pub mod fft;
pub mod grid;
pub mod isotonic;
pub mod optimize;
pub mod quadrature;
pub mod special;

pub use grid::GridFunction;
