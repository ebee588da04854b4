//! Numerical building blocks shared by every other module.

pub mod quadrature;
pub mod spd;
pub mod special;

pub use spd::{decompose, spectral_norm_inv_sqrt, SpdDecomposition, SpdMatrix};
pub use special::{duhamel_time_integral, gamma, ln_gamma, lower_incomplete_gamma};
