//! Spectral parameter power series (SPPS) for one-dimensional Dirac systems.

pub mod error;
pub mod expr;
pub mod cli;
pub mod grid;
pub mod homogeneous;
pub mod oracle;
pub mod powers;
pub mod spectral;
pub mod spps;
pub mod sturm;
pub mod sum;
pub mod system;

pub use error::{Error, Result};
pub use grid::{GridFn, Mesh};
