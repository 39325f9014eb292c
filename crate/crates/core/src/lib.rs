//! Logarithmic-coordinate models of transcendental dynamics.

pub mod conformal;
pub mod bouquet;
pub mod contraction;
pub mod headstart;
pub mod error;
pub mod hyperbolic;
pub mod quad;
pub mod scaled;
pub mod tractmodel;

pub use error::{Error, Result};
pub use num_complex::Complex64;
