use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("operation `{op}`: table has length {got}, expected {expected}")]
    TableLength { op: String, got: usize, expected: usize },
    #[error("operation `{op}`: entry {value} at index {index} is out of range for size {size}")]
    TableEntry { op: String, index: usize, value: u32, size: usize },
    #[error("duplicate operation name `{0}`")]
    DuplicateOperation(String),
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("operation `{op}` expects {expected} arguments, got {got}")]
    Arity { op: String, expected: usize, got: usize },
    #[error("element {value} out of range for universe of size {size}")]
    OutOfRange { value: usize, size: usize },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("relation sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("unbound relation variable `{0}`")]
    Unbound(String),
    #[error("variable `{0}` has no declared role")]
    MissingRole(String),
    #[error("relation `{var}` is declared {role} but is not one: {reason}")]
    RoleViolation { var: String, role: String, reason: String },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported identity shape: {0}")]
    UnsupportedShape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("json: {0}")]
    Json(String),
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
