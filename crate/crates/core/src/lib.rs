//! Eavesdropper information bounds and secret-key efficiencies for two-way
//! Gaussian quantum key distribution.

pub mod error;
pub mod attacks;
pub mod bounds;
pub mod channels;
pub mod cli;
pub mod estimation;
pub mod gaussian;
pub mod protocols;
pub mod reduction;
mod optimize;

pub use error::{Error, Result};
