//! Feedback Nash equilibria, closed-loop simulation and transition-kernel
//! diagnostics for stochastic opinion-dynamics games on weighted networks.

pub mod coefficients;
pub mod equilibrium;
pub mod error;
pub mod network;
pub mod scenario;
pub mod sde;
pub mod spectral;

pub use error::{Error, Result};
