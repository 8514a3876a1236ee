use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("player set is empty")]
    EmptyPlayerSet,
    #[error("weight of player {player} is negative")]
    NegativeWeight { player: usize },
    #[error("quota must be positive")]
    NonPositiveQuota,
    #[error("quota {quota} exceeds total weight {total}; no coalition can win")]
    QuotaExceedsTotalWeight { quota: String, total: String },
    #[error("total weight is zero")]
    ZeroTotalWeight,
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed linear program: {0}")]
    MalformedProgram(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{n} players exceed the explicit enumeration limit of {limit}")]
    TooManyPlayers { n: usize, limit: usize },
    #[error("{n} players exceed the enumeration limit of {limit} for this engine")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("weights must be integers; rescale the representation first")]
    NonIntegerWeights,
    #[error("integer total weight {0} is too large for the weight-indexed tables")]
    WeightTooLarge(String),
    #[error("normalized quota must lie strictly between 0 and 1")]
    DegenerateQuota,
    #[error("weight {0} does not occur in every game of the sequence")]
    WeightAbsent(String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error("cannot emit a report without rows")]
    EmptyReport,
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("the game has no imputation: singleton values sum to more than 1")]
    EmptyImputationSet,
    #[error("unknown engine `{0}`; expected auto, brute or typed")]
    UnknownEngine(String),
    #[error("environment variable {var} has invalid value `{value}`")]
    InvalidEnv { var: String, value: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
