use alloc::string::String;
use core::fmt;

/// Errors produced by the symbolic engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CalcError {
    /// Two values referencing different charts were combined.
    ChartMismatch,
    /// A generator name was not found in the chart.
    UnknownGenerator(String),
    /// An operation required a homogeneous input.
    Inhomogeneous,
    /// The chart does not carry a (verified) contact structure.
    NotContact,
    /// The flat-system solver exceeded its degree bound without
    /// reaching a zero residual.
    NoPolynomialSolution,
    /// A value had the wrong degree for the requested operation.
    DegreeMismatch { expected: i64, found: String },
    /// Chart construction rejected the generator data.
    InvalidChart(String),
    /// A polynomial used a generator that the operation cannot handle
    /// (e.g. a formal derivative along an odd generator).
    UnsupportedGenerator(String),
}

impl fmt::Display for CalcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalcError::ChartMismatch => write!(f, "values belong to different charts"),
            CalcError::UnknownGenerator(name) => write!(f, "unknown generator `{name}`"),
            CalcError::Inhomogeneous => write!(f, "input must be homogeneous"),
            CalcError::NotContact => write!(f, "chart is not contact"),
            CalcError::NoPolynomialSolution => {
                write!(f, "no polynomial solution within the degree bound")
            }
            CalcError::DegreeMismatch { expected, found } => {
                write!(f, "expected degree {expected}, found {found}")
            }
            CalcError::InvalidChart(msg) => write!(f, "invalid chart: {msg}"),
            CalcError::UnsupportedGenerator(name) => {
                write!(f, "operation not defined for generator `{name}`")
            }
        }
    }
}

impl core::error::Error for CalcError {}

pub type Result<T> = core::result::Result<T, CalcError>;
