use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid view: {0}")]
    InvalidView(String),

    #[error("refused: {what} exceeds the limit of {limit}")]
    RefusedTooLarge { what: String, limit: u64 },

    #[error("no feasible assignment")]
    Infeasible,

    #[error("reference action 0 is infeasible, the cavity difference is undefined")]
    InfeasibleReference,

    #[error("difference with -inf as subtrahend is undefined")]
    UndefinedDifference,

    #[error("network is not a forest")]
    NotATree,

    #[error("depth must be even, got {0}")]
    InvalidDepth(usize),

    #[error("invalid parameter {param}: {message}")]
    InvalidParams { param: String, message: String },

    #[error("correlation constant C = {0} is outside (-1, 1)")]
    UnsupportedCorrelation(f64),

    #[error("encode error: {0}")]
    Encode(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn invalid_params(param: impl Into<String>, message: impl Into<String>) -> Error {
        Error::InvalidParams {
            param: param.into(),
            message: message.into(),
        }
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAssignment(_) => "InvalidAssignment",
            Error::Parse { .. } => "ParseError",
            Error::InvalidNetwork(_) => "InvalidNetwork",
            Error::InvalidView(_) => "InvalidView",
            Error::RefusedTooLarge { .. } => "RefusedTooLarge",
            Error::Infeasible => "Infeasible",
            Error::InfeasibleReference => "InfeasibleReference",
            Error::UndefinedDifference => "UndefinedDifference",
            Error::NotATree => "NotATree",
            Error::InvalidDepth(_) => "InvalidDepth",
            Error::InvalidParams { .. } => "InvalidParams",
            Error::UnsupportedCorrelation(_) => "UnsupportedCorrelation",
            Error::Encode(_) => "EncodeError",
            Error::Invariant(_) => "InvariantViolated",
        }
    }
}
