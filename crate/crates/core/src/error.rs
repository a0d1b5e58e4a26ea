use thiserror::Error;

/// Errors produced by the farsplit library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("generator mismatch: expected {expected}, found {found}")]
    GeneratorMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("numerically singular system (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("minimal power source has effectively infinite power (mode {mode})")]
    InfinitePower { mode: i64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
