//! Multivariate OU-type stochastic volatility model with matrix subordinator
//! jumps: transforms, Fourier pricing, exact simulation, covariance swaps and
//! calibration.

pub mod calibration;
pub mod covswap;
pub mod error;
pub mod fourier;
pub mod gamma;
pub mod matrix;
pub mod model;
pub mod ou_wishart;
pub mod levy;
pub mod mc;
pub mod quad;

pub use error::{Error, Result};
