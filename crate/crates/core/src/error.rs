use thiserror::Error;

use crate::attribute::Attribute;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{attribute} = {value} is outside [0, 1]")]
    OutOfRange { attribute: Attribute, value: f64 },

    #[error("expected 14 attribute values, got {0}")]
    WrongArity(usize),

    #[error("unknown categorical level `{0}`")]
    UnknownLevel(String),

    #[error("attribute mask is empty")]
    EmptyMask,

    #[error("vectors cover different attribute sets")]
    ShapeMismatch,

    #[error("{attribute} is not active in this vector")]
    InactiveAttribute { attribute: Attribute },

    #[error("benchmark for `{leaf}` has max {max} <= min {min}")]
    DegenerateBenchmark { leaf: String, min: f64, max: f64 },

    #[error("child weights of node `{node}` sum to {sum}, expected 1")]
    WeightSumViolation { node: String, sum: f64 },

    #[error("weight of {len} children given {weights} weights")]
    WeightArity { len: usize, weights: usize },

    #[error("leaf `{0}` has no input value")]
    MissingLeaf(String),

    #[error("{0} is supplied directly but no score was given")]
    MissingDirect(Attribute),

    #[error("context tree is invalid: {0}")]
    InvalidTree(String),

    #[error("duplicate strategy name `{0}`")]
    DuplicateName(String),

    #[error("strategy library is empty")]
    EmptyLibrary,

    #[error("noise scale must be nonnegative, got {0}")]
    NegativeSigma(f64),

    #[error("multipliers over the active mask sum to zero")]
    DegenerateMultipliers,

    #[error("scenario `{0}` has no opponent vector")]
    MissingOpponent(String),

    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Name of the input field the error refers to, when there is one.
    pub fn field_name(&self) -> Option<String> {
        match self {
            Error::OutOfRange { attribute, .. } | Error::InactiveAttribute { attribute } => {
                Some(attribute.code().to_string())
            }
            Error::MissingDirect(attribute) => Some(attribute.code().to_string()),
            Error::MissingLeaf(leaf) => Some(leaf.clone()),
            Error::DegenerateBenchmark { leaf, .. } => Some(leaf.clone()),
            Error::WeightSumViolation { node, .. } => Some(node.clone()),
            Error::DuplicateName(_) => Some("name".into()),
            Error::NegativeSigma(_) => Some("sigma".into()),
            Error::InvalidField { field, .. } => Some(field.clone()),
            _ => None,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
