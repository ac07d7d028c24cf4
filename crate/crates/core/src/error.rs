use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} is not addressable for half-size n={n} (valid: -n..=-1, 1..=n)")]
    SiteOutOfDomain { site: i64, n: usize },

    #[error("array index {index} is out of range for side {side}")]
    IndexOutOfRange { index: usize, side: usize },

    #[error("invalid ensemble size n={0}; half-size must be at least 1")]
    InvalidSize(usize),

    #[error("unknown symmetry class `{0}`")]
    InvalidClass(String),

    #[error("matrix is not Hermitian: deviation {0:e} at ({1}, {2})")]
    NotHermitian(f64, usize, usize),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("eigensolver failed to converge for eigenvalue {index} after {sweeps} sweeps")]
    SolverFailure { index: usize, sweeps: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("spectral parameter {0} is too close to the real axis")]
    NearRealAxis(Complex64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("branch ambiguity at z={z}: {qualifying} roots with positive imaginary part")]
    BranchAmbiguity { z: Complex64, qualifying: usize },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("points z1={0} and z2={1} coincide; the formula diverges there")]
    CoincidentPoints(Complex64, Complex64),

    #[error("unsupported moment order {0} (maximum 8)")]
    UnsupportedOrder(usize),

    #[error("probe {0} is not present in the records")]
    MissingProbe(Complex64),

    #[error("need at least {needed} records, got {got}")]
    SampleSize { needed: usize, got: usize },

    #[error("singular matrix encountered during LU factorization at column {0}")]
    Singular(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
