use thiserror::Error;

/// Failure while reading a rule file. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("line {line}: unknown symbol `{token}`")]
    UnknownSymbol { line: usize, token: String },
    #[error("line {line}: duplicate definition of `{token}`")]
    DuplicateDefinition { line: usize, token: String },
}

/// Errors raised by generation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("rule `{rule}` has kind {found}, operation needs {needed}")]
    WrongKind {
        rule: String,
        found: &'static str,
        needed: &'static str,
    },
    #[error("output would hold {requested} cells, limit is {limit}")]
    LevelOverflow { requested: String, limit: u64 },
    #[error("level {level} is outside the scripted range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("two constituents write cell {cell:?} of supertile `{supertile}`")]
    PlacementCollision { supertile: String, cell: Vec<i64> },
    #[error("letter `{letter}` is not in the alphabet of level {level}")]
    AlphabetMismatch { letter: String, level: usize },
    #[error("symbol index {0} is out of range")]
    BadSymbol(usize),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("rule is not primitive")]
    NotPrimitive,
    #[error("power iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("rule is not of constant length")]
    NotConstantLength,
    #[error("no letter generates a one-sided fixed point")]
    NoFixedPoint,
    #[error("patch does not occur in the sampled language")]
    PatchNotFound,
    #[error("no return vectors found in the sampled supertile")]
    EmptyReturnSample,
    #[error("frequency spread has not stabilized by depth {depth} (spread {spread:e})")]
    DepthTooShallow { depth: usize, spread: f64 },
    #[error("partial sums did not converge (gap {gap:e})")]
    NotConverged { gap: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rule failed validation: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 2 for unreadable input or bad arguments, 3 for
    /// a rule that does not support the request, 1 for computations that
    /// ran but failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidArgument(_) | Error::LevelOutOfRange { .. } => 2,
            Error::WrongKind { .. }
            | Error::PlacementCollision { .. }
            | Error::AlphabetMismatch { .. }
            | Error::BadSymbol(_)
            | Error::UnknownType(_)
            | Error::NotIrreducible
            | Error::NotPrimitive
            | Error::NotConstantLength
            | Error::NoFixedPoint
            | Error::Invalid(_) => 3,
            Error::LevelOverflow { .. }
            | Error::NoConvergence { .. }
            | Error::PatchNotFound
            | Error::EmptyReturnSample
            | Error::DepthTooShallow { .. }
            | Error::NotConverged { .. } => 1,
        }
    }
}
