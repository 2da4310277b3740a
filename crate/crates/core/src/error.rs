use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by the numerical pipeline.
///
/// Node indices refer to positions on the uniform mesh of the function that
/// triggered the failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-finite value {value} at node {node} (x = {x})")]
    Sampling { node: usize, x: f64, value: String },
    #[error("grid functions live on different meshes")]
    MeshMismatch,
    #[error("division by zero at node {node}")]
    DivisionByZeroNode { node: usize },
    #[error("singular leading coefficient matrix at node {node}")]
    SingularCoefficient { node: usize },
    #[error("no non-vanishing solution among the candidates (vanishing at nodes {nodes:?})")]
    NonVanishingNotFound { nodes: Vec<usize> },
    #[error("initial value matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularInitialMatrix { condition: f64 },
    #[error("all polynomial coefficients vanish")]
    DegeneratePolynomial,
    #[error("spectral sweep stalled after index {last_index}")]
    SweepStalled { last_index: i64 },
    #[error("invalid seed solution: {0}")]
    InvalidSeed(String),
    #[error("oracle step size too coarse (estimated error {estimate:e} > tolerance {tolerance:e})")]
    StepSizeTooCoarse { estimate: f64, tolerance: f64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Error {
    /// Short variant name, used by the command line front end when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidMesh(_) => "InvalidMesh",
            Error::Sampling { .. } => "SamplingError",
            Error::MeshMismatch => "MeshMismatch",
            Error::DivisionByZeroNode { .. } => "DivisionByZeroNode",
            Error::SingularCoefficient { .. } => "SingularCoefficient",
            Error::NonVanishingNotFound { .. } => "NonVanishingNotFound",
            Error::SingularInitialMatrix { .. } => "SingularInitialMatrix",
            Error::DegeneratePolynomial => "DegeneratePolynomial",
            Error::SweepStalled { .. } => "SweepStalled",
            Error::InvalidSeed(_) => "InvalidSeed",
            Error::StepSizeTooCoarse { .. } => "StepSizeTooCoarse",
            Error::Parse(_) => "ParseError",
            Error::Eval(_) => "EvalError",
        }
    }
}
