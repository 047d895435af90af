use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("negative power of a singular matrix (zero eigenvalue with floor 0)")]
    Singular,

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("invalid Schatten order {0}: must be >= 1")]
    InvalidOrder(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectral factorization stagnated with residual {best_residual:.3e}")]
    Stagnation { best_residual: f64 },

    #[error("symbol is not positive definite on the grid (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("Fourier fit error {fit_error:.3e} exceeds tolerance {tol:.3e}; increase the band width (currently {band})")]
    FitError {
        fit_error: f64,
        tol: f64,
        band: usize,
    },

    #[error("outerness certificate indeterminate: |det A| = {min_abs_det:.3e} on the unit circle")]
    IndeterminateCertificate { min_abs_det: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
