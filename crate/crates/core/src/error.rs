use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories. The CLI maps them onto exit codes: validation 1,
/// numerical 2, I/O 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("projection order {requested} outside 1..={order}")]
    ProjectionOutOfRange { requested: usize, order: usize },

    #[error("coefficient of degree {degree} not allowed in a jet of order {order}")]
    DegreeOutOfRange { degree: usize, order: usize },

    #[error("singular linear part")]
    SingularLinearPart,

    #[error("ill-conditioned linear part (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("not a contraction: eigenvalue {value} has modulus {modulus}")]
    NotContraction { value: String, modulus: f64 },

    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    #[error(
        "near-resonance in component {component}, exponent {exponent:?}: gap {gap:.3e} (condition number {condition:.3e})"
    )]
    NearResonance {
        component: usize,
        exponent: Vec<u32>,
        gap: f64,
        condition: f64,
    },

    #[error("closure violation: component {component}, exponent {exponent:?}, magnitude {magnitude:.3e}")]
    ClosureViolation {
        component: usize,
        exponent: Vec<u32>,
        magnitude: f64,
    },

    #[error("not a group element: {0}")]
    NotMember(String),

    #[error("{what} residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualExceeded {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("duplicate key: component {component}, exponents {exponents:?}")]
    DuplicateKey { component: usize, exponents: Vec<u32> },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularLinearPart
            | Error::IllConditioned { .. }
            | Error::EigenFailure(_)
            | Error::NearResonance { .. }
            | Error::ClosureViolation { .. }
            | Error::ResidualExceeded { .. } => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}
