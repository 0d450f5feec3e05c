pub mod analytic;
pub mod catalog;
pub mod coeffs;
pub mod convergence;
pub mod error;
pub mod ext;
pub mod kernels;
pub mod quadrature;
pub mod recovery;
pub mod series;
pub mod sum;

pub use error::{Error, Result};
