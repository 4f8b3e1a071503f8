use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported matrix dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("trace is {found}, expected {expected}")]
    BadTrace { expected: f64, found: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("POVM effects do not sum to the identity (max deviation {deviation:e})")]
    IncompletePovm { deviation: f64 },

    #[error("probability {value:e} for outcome {label} is negative beyond rounding")]
    NegativeProbability { label: String, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    Unnormalized { sum: f64 },

    #[error(
        "degenerate Fisher-information point: outcome {label} has p = {probability:e} \
         but |dp| = {slope:e}; take the limit analytically or move off the boundary"
    )]
    DegeneratePoint {
        label: String,
        probability: f64,
        slope: f64,
    },

    #[error("denominator {value:e} is numerically zero")]
    ZeroDenominator { value: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),
}
