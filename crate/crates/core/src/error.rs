use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the survival pipeline.
///
/// Each variant has a stable [`Error::name`] used by the command line front
/// end when reporting failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("argument outside the generating function domain: {0}")]
    DomainError(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("expected {expected} roots inside the unit disk, found {found}")]
    RootCountMismatch {
        expected: usize,
        found: usize,
        /// Every candidate root of the truncated polynomial with its modulus.
        candidates: Vec<(Complex64, f64)>,
    },

    #[error("root refinement did not converge near {root} (residual {residual:e})")]
    RootRefinementFailure { root: Complex64, residual: f64 },

    #[error(
        "initial-value system is singular (rank {rank} of {size}, zero z0 pattern {zero_z0:?})"
    )]
    SingularInitialSystem {
        rank: usize,
        size: usize,
        zero_z0: Vec<bool>,
    },

    #[error("initial-value solution is not a probability vector: {0:?}")]
    NonProbabilisticSolution(Vec<f64>),

    #[error("m-sequence recursion cannot be resolved at step {step}")]
    DegenerateRecursionFailure { step: usize },

    #[error("m-sequence entry m_{step}^({season}) = {value:e} is not a probability")]
    NonProbabilisticSequence {
        step: usize,
        season: usize,
        value: f64,
    },

    #[error("main recursion defect {defect:e} exceeds tolerance {tolerance:e}")]
    ConsistencyFailure { defect: f64, tolerance: f64 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("net profit condition violated: mean claim {mean} >= {limit}")]
    NetProfitViolation { mean: f64, limit: f64 },

    #[error("exhaustive enumeration needs {paths} paths, cap is {cap}")]
    OracleTooLarge { paths: f64, cap: u64 },

    #[error("configuration error: {0}")]
    ConfigError(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::DomainError(_) => "DomainError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::InvalidModel(_) => "InvalidModel",
            Error::RootCountMismatch { .. } => "RootCountMismatch",
            Error::RootRefinementFailure { .. } => "RootRefinementFailure",
            Error::SingularInitialSystem { .. } => "SingularInitialSystem",
            Error::NonProbabilisticSolution(_) => "NonProbabilisticSolution",
            Error::DegenerateRecursionFailure { .. } => "DegenerateRecursionFailure",
            Error::NonProbabilisticSequence { .. } => "NonProbabilisticSequence",
            Error::ConsistencyFailure { .. } => "ConsistencyFailure",
            Error::ResourceLimit(_) => "ResourceLimit",
            Error::NetProfitViolation { .. } => "NetProfitViolation",
            Error::OracleTooLarge { .. } => "OracleTooLarge",
            Error::ConfigError(_) => "ConfigError",
            Error::InvariantViolation(_) => "InvariantViolation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
