use thiserror::Error;

/// Error type shared by every module in this crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds tolerance)")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("dimension mismatch: {context}")]
    DimMismatch { context: String },

    #[error("invalid rank {rank} for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("unknown state name: {name}")]
    UnknownName { name: String },

    #[error("parse error: {context}")]
    ParseError { context: String },

    #[error("state file violates the schema: {context}")]
    SchemaViolation { context: String },

    #[error("operator is not a valid state: {context}")]
    InvalidState { context: String },

    #[error("rotation parameters are not unitary (defect {defect:.3e})")]
    NonUnitaryParams { defect: f64 },

    #[error("optimization budget must allow at least one restart and one iteration")]
    BudgetZero,

    #[error("map is not completely positive (Choi eigenvalue {eigenvalue:.3e})")]
    NotCP { eigenvalue: f64 },

    #[error("negative eigenvalue {eigenvalue:.3e} where a non-negative operator is required")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("epsilon {epsilon} outside the admissible range (0, {max}]")]
    EpsilonOutOfRange { epsilon: f64, max: f64 },

    #[error("divergence is infinite: {context}")]
    Infinite { context: String },

    #[error("precondition violated: {context}")]
    PreconditionViolated { context: String },

    #[error("inapplicable parameter combination: {context}")]
    NotApplicable { context: String },

    #[error("problem size too large: {context}")]
    TooLarge { context: String },

    #[error("type class enumeration would exceed the cap: {count} classes")]
    TooManyTypes { count: u128 },

    #[error("marginals are inconsistent: {context}")]
    MarginalMismatch { context: String },

    #[error("input is numerically singular: {context}")]
    SingularInput { context: String },

    #[error("argument out of range: {context}")]
    OutOfRange { context: String },

    #[error("i/o error: {context}")]
    Io { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;
