use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("element `{id}` has degree {degree}, above the bound {bound}")]
    DegreeBound { id: String, degree: usize, bound: usize },
    #[error("query index {index} outside 1..={bound}")]
    QueryIndex { index: usize, bound: usize },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("outside the enumeration envelope: {0}")]
    Envelope(String),
    #[error("type not in catalog: {0}")]
    OutOfCatalog(String),
    #[error("catalog is not exhaustive")]
    NonExhaustive,
    #[error("no catalog for radius {0}")]
    MissingRadius(usize),
    #[error("atoms of different radii in one sentence; lift first")]
    MixedRadii,
    #[error("not a 0-profile")]
    NotZeroProfile,
    #[error("invalid rotation map: {0}")]
    RotationMap(String),
    #[error("size budget exceeded: {0}")]
    Budget(String),
    #[error("relation `{0}` is not binary")]
    NotBinary(String),
    #[error("malformed provenance: {0}")]
    Provenance(String),
    #[error("graph is not regular")]
    NotRegular,
    #[error("empty input")]
    Empty,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}
