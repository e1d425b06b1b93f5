use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Integrity(#[from] IntegrityError),

    #[error("score {0} outside [0, 5]")]
    ScoreOutOfRange(f64),

    #[error("unit score {0} outside [0, 1]")]
    UnitScoreOutOfRange(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("score state does not cover dataset: {0}")]
    Coverage(String),

    #[error("target product `{0}` not found in dataset")]
    TargetNotFound(String),

    #[error("dataset carries no ground-truth labels")]
    MissingLabels,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dataset invariant that a construction attempt violated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrityError {
    #[error("review `{review}` references unknown reviewer `{reviewer}`")]
    DanglingReviewer { review: String, reviewer: String },

    #[error("review `{review}` references unknown product `{product}`")]
    DanglingProduct { review: String, product: String },

    #[error("reviewer `{reviewer}` has seq {seq} more than once")]
    DuplicateSeq { reviewer: String, seq: u32 },

    #[error("reviewer `{reviewer}` seq values are not consecutive from 1 (missing {missing})")]
    SeqGap { reviewer: String, missing: u32 },

    #[error("review `{review}` has seq 0 (seq starts at 1)")]
    ZeroSeq { review: String },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
}
