//! Monotone finite difference schemes for degenerate convection-diffusion
//! equations, together with the kinetic-formulation diagnostics and the
//! convergence studies built on them.

pub mod error;
pub mod grid;
pub mod harness;
pub mod kinetic;
pub mod model;
pub mod quadrature;
pub mod scheme;

pub use error::{Error, Result};
