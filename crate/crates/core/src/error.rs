use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("arc references unknown node `{0}`")]
    DanglingArc(String),
    #[error("arc {from} -> {to} must connect a place and a transition")]
    NotBipartite { from: String, to: String },
    #[error("arc {from} -> {to} has weight {weight}; only ordinary nets (weight 1) are supported")]
    NonOrdinaryArc {
        from: String,
        to: String,
        weight: u32,
    },
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error(
        "transition `{0}` is controllable; only uncontrollable transitions transform constraints"
    )]
    ControllableTransition(String),
    #[error("place `{place}` is not an input place of `{transition}`")]
    NotInPreset { place: String, transition: String },
    #[error("negative coefficient {0} in linear constraint")]
    NegativeWeight(i64),
    #[error("negative bound {0}: the constraint denotes the empty set")]
    NegativeBound(i64),
    #[error(
        "uncontrollable source transition `{0}` has positive gain; no admissible transformation exists"
    )]
    UnsatisfiableTransformation(String),
    #[error("exploration cap reached before a verdict was obtained")]
    Inconclusive,
    #[error("bounded universe of {size} markings exceeds the limit of {limit}")]
    UniverseTooLarge { size: u128, limit: u128 },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
