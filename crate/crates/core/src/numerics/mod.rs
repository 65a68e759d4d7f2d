//! Dense symmetric linear algebra, chi-square distribution functions,
//! quadrature and polynomial helpers.

use thiserror::Error;

pub mod chi2;
pub mod linalg;
pub mod poly;
pub mod quad;

pub use chi2::{chi2_cdf, chi2_quantile, chi2_sf, noncentral_chi2_cdf};
pub use linalg::{eigen_sym, pinv_quadratic_form, pseudo_inverse, EigenDecomp, PseudoInverse, SymMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("NoConvergence: Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("NotSymmetric: entries ({row}, {col}) and ({col}, {row}) differ")]
    NotSymmetric { row: usize, col: usize },
    #[error("Shape: expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("QuadratureFailure: error estimate {error_estimate:e} above tolerance")]
    QuadratureFailure { error_estimate: f64 },
}
