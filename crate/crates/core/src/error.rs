use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not a prime below 2^31")]
    InvalidModulus(u64),
    #[error("value {value} is not a residue mod {modulus}")]
    ValueOutOfRange { value: u64, modulus: u64 },
    #[error("field modulus mismatch: expected {expected}, got {actual}")]
    ModulusMismatch { expected: u64, actual: u64 },
    #[error("threshold {m} out of range for {n} players over GF({p})")]
    ThresholdOutOfRange { m: usize, n: usize, p: u64 },
    #[error("need at least {needed} shares, got {got}")]
    NotEnoughShares { needed: usize, got: usize },
    #[error("duplicate share abscissa x = {0}")]
    DuplicateShare(u64),
    #[error("share of holder {holder} failed tag verification")]
    BadTag { holder: usize },
    #[error("shares from different epochs ({0} and {1})")]
    EpochMismatch(u64, u64),
    #[error("epoch {0} was already issued")]
    DuplicateEpoch(u64),
    #[error("subshare count must be at least 2, got {0}")]
    SubshareCount(usize),
    #[error("coin probability {0} outside its allowed range")]
    AlphaOutOfRange(f64),
    #[error("iteration cap must be at least 1")]
    ZeroCap,
    #[error("invalid player layout: {0}")]
    Layout(String),
    #[error("unknown deviation `{0}`")]
    UnknownDeviation(String),
    #[error("utility table is missing the entry for player {player}, vector {vector}")]
    MissingUtility { player: usize, vector: String },
    #[error("utility table violates the preference axioms: {0}")]
    InvalidUtilities(String),
    #[error("degenerate utilities for player {0}: need u_only > u_all > u_none")]
    DegenerateUtilities(usize),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("strategy set of player {0} would become empty")]
    EmptyStrategySet(usize),
    #[error("bounded game horizon {0} unsupported (1 or 2 rounds)")]
    Horizon(usize),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
