use thiserror::Error;

/// Failures of the plaintext optimization core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("{context}: dimension {found}, expected {expected}")]
    Dimension {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid box at coordinate {index}: lower {lower} > upper {upper}")]
    InvalidBox { index: usize, lower: f64, upper: f64 },
    #[error("agent {agent}: log(1 + x) undefined at x = {value}")]
    Domain { agent: usize, value: f64 },
    #[error("non-finite iterate at k = {k}")]
    Divergence { k: usize },
    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

impl OptError {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Self {
        OptError::Dimension {
            context: context.into(),
            expected,
            found,
        }
    }
}

/// Failures of the encryption layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CryptoError {
    #[error("value {value} outside representable range ±{bound}")]
    Overflow { value: f64, bound: f64 },
    #[error("residue not in [0, modulus)")]
    ResidueOutOfRange,
    #[error("scheme mismatch: expected {expected}, found {found}")]
    SchemeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("scale mismatch: {left} vs {right}")]
    ScaleMismatch { left: u32, right: u32 },
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),
    #[error("key size {bits} bits below minimum {min}")]
    KeyTooSmall { bits: u64, min: u64 },
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("invalid codec: {0}")]
    InvalidCodec(String),
}

/// Failures while simulating the message-passing protocol.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("at least two agents are required, got {0}")]
    TooFewAgents(usize),
    #[error("k = {k}, agent {agent}: message component {value} exceeds B_max = {bound}")]
    MessageOverflow {
        k: usize,
        agent: usize,
        value: f64,
        bound: f64,
    },
    #[error("k = {k}: no upload received from agent {agent}")]
    MissingUpload { k: usize, agent: usize },
    #[error("k = {k}, agent {agent}: decrypted aggregate implausible, wrong key?")]
    KeyMismatch { k: usize, agent: usize },
    #[error("security regression: {0}")]
    SecurityRegression(String),
    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

/// Crate-level error with module-qualified messages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("optcore: {0}")]
    Opt(#[from] OptError),
    #[error("crypto: {0}")]
    Crypto(#[from] CryptoError),
    #[error("protocol: {0}")]
    Protocol(ProtocolError),
    #[error("experiments: {0}")]
    Experiment(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ProtocolError> for Error {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Opt(o) => Error::Opt(o),
            ProtocolError::Crypto(c) => Error::Crypto(c),
            other => Error::Protocol(other),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
