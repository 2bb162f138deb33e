//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "degenerate parametrization: |z'| = {magnitude:.3e} at node {index} (tolerance {tol:.3e})"
    )]
    DegenerateParametrization {
        index: usize,
        magnitude: f64,
        tol: f64,
    },

    #[error("contour self-intersects: nodes {i} and {j} coincide within {tol:.3e}")]
    SelfIntersection { i: usize, j: usize, tol: f64 },

    #[error("shift is not an involution: max |alpha(alpha(t)) - t| = {max_deviation:.3e} (tolerance {tol:.3e})")]
    InvolutionViolation { max_deviation: f64, tol: f64 },

    #[error("shift parameter map is not strictly monotone on the grid")]
    NonMonotoneShift,

    #[error("shift derivative vanishes at node {index} (|alpha'| = {magnitude:.3e})")]
    ZeroShiftDerivative { index: usize, magnitude: f64 },

    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("exponent at byte {offset} must be an integer literal")]
    NonIntegerExponent { offset: usize },

    #[error("division by a near-zero value (|denominator| = {magnitude:.3e})")]
    DivisionByZero { magnitude: f64 },

    #[error("expression references unbound variable `{name}`")]
    UnboundVariable { name: &'static str },

    #[error("spectral mode of the Cauchy operator requires the unit circle")]
    ModeMismatch,

    #[error("resolution too low: {detail}")]
    Resolution { detail: String },

    #[error("kernel evaluation failed at node pair ({row}, {col}): {source}")]
    KernelEvaluation {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("phase jump of {jump:.4} rad between nodes {index} and {next}; unwrapping needs a finer grid")]
    PhaseJump {
        index: usize,
        next: usize,
        jump: f64,
    },

    #[error(
        "sample at node {index} has magnitude {magnitude:.3e}, below the zero threshold {tol:.3e}"
    )]
    ZeroCrossing {
        index: usize,
        magnitude: f64,
        tol: f64,
    },

    #[error("winding of the determinant quotient is odd ({winding}); the half-winding index is undefined")]
    ParityViolation { winding: i64 },

    #[error("coefficient matrix at node {index} is numerically singular (condition {cond:.3e})")]
    SingularNode { index: usize, cond: f64 },

    #[error("operator is not Noetherian: {detail}")]
    NotNoetherian { detail: String },

    #[error("numerical index inconclusive: {detail}")]
    InconclusiveIndex { detail: String },

    #[error("problem file error at {pointer}: {detail}")]
    Schema { pointer: String, detail: String },

    #[error("grids of the operands do not match")]
    GridMismatch,

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the command-line interface maps this error to.
    ///
    /// 2 = Noether condition violated, 3 = resolution insufficient,
    /// 4 = input error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotNoetherian { .. } => 2,
            Error::PhaseJump { .. }
            | Error::ZeroCrossing { .. }
            | Error::Resolution { .. }
            | Error::ParityViolation { .. }
            | Error::InconclusiveIndex { .. } => 3,
            _ => 4,
        }
    }
}
