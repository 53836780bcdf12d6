use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix or vector contains non-finite entries")]
    NonFinite,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("function is not finite at argument {at}")]
    DomainError { at: f64 },

    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid subsystem layout: {0}")]
    InvalidFactorDims(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("expression is not simple; non-commuting products: {}", format_pairs(.pairs))]
    NonSimpleExpression { pairs: Vec<(String, String)> },

    #[error("function argument `{0}` involves more than one measurement")]
    MultivariateFunction(String),

    #[error("operators commute; the inconsistency demonstration is vacuous")]
    CommutingInput,

    #[error("outcome space too large ({count} tuples, limit {limit})")]
    StateSpaceTooLarge { count: f64, limit: usize },

    #[error("invalid experiment: {0}")]
    InvalidSpec(String),

    #[error("schedule has a gap or overlap at t = {at}")]
    ScheduleGap { at: f64 },

    #[error("dimension {found} too small (minimum {min})")]
    DimTooSmall { min: usize, found: usize },

    #[error("state has weight {boundary_weight:e} on the truncation boundary")]
    UnsafeState { boundary_weight: f64 },

    #[error("not simple under the canonical representation: {}", .which.join(", "))]
    NonSimpleInput { which: Vec<String> },

    #[error("not a canonical polynomial: {0}")]
    NonPolynomial(String),

    #[error("unknown demo `{0}`")]
    UnknownDemo(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ")
}
