//! Error type shared by all modules of the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when constructing specs, sampling, or
/// running an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A dimension argument was zero or incompatible with an operation.
    BadDimension { expected: String, got: usize },
    /// Vector lengths of two arguments disagree.
    DimensionMismatch { left: usize, right: usize },
    /// A vector expected to have unit norm does not.
    NotUnitNorm { norm: f64 },
    /// A scalar parameter is outside its admissible range.
    BadParameter { name: &'static str, value: f64, requirement: &'static str },
    /// A walk specification violates one of its structural invariants.
    BadSpec(String),
    /// The requested operation is not defined for this kernel.
    UnsupportedKernel { operation: &'static str, kernel: String },
    /// A custom 1-D jump law failed validation at construction.
    BadJumpLaw(String),
    /// Too few samples or walks requested for a statistical routine.
    TooFewSamples { needed: usize, got: usize },
    /// A simulated position left the representable floating-point range.
    Overflow { step: usize },
    /// The quadrature rule failed to converge to the requested accuracy.
    QuadratureNotConverged { estimated_error: f64 },
    /// Geometry of an experiment is degenerate (e.g. inner radius >= outer).
    DegenerateGeometry(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadDimension { expected, got } => {
                write!(f, "bad dimension: expected {expected}, got {got}")
            }
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::NotUnitNorm { norm } => {
                write!(f, "vector is not unit norm (|.|| = {norm})")
            }
            Error::BadParameter { name, value, requirement } => {
                write!(f, "parameter {name} = {value} violates: {requirement}")
            }
            Error::BadSpec(msg) => write!(f, "invalid walk spec: {msg}"),
            Error::UnsupportedKernel { operation, kernel } => {
                write!(f, "{operation} is not defined for kernel {kernel}")
            }
            Error::BadJumpLaw(msg) => write!(f, "invalid 1-D jump law: {msg}"),
            Error::TooFewSamples { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            Error::Overflow { step } => {
                write!(f, "position overflowed floating-point range at step {step}")
            }
            Error::QuadratureNotConverged { estimated_error } => {
                write!(f, "quadrature did not converge (estimated error {estimated_error:e})")
            }
            Error::DegenerateGeometry(msg) => write!(f, "degenerate geometry: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
