use thiserror::Error;

use crate::model::Variant;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("schedule shape mismatch: expected {expected_rows} rows of width {expected_width}, got {got}")]
    ScheduleShape {
        expected_rows: usize,
        expected_width: usize,
        got: String,
    },

    #[error("variant {0} is not valid here: {1}")]
    WrongVariant(Variant, &'static str),

    #[error("dimension mismatch: generator acts on {generator} modes, state has {state}")]
    DimensionMismatch { generator: usize, state: usize },

    #[error("system of {n} sites exceeds the dense limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("series expansion did not converge within {0} terms")]
    NoConvergence(usize),

    #[error("degenerate spectrum bounds: e_min = {e_min}, e_max = {e_max}")]
    DegenerateBounds { e_min: f64, e_max: f64 },

    #[error("energy {energy} lies below the ground energy {e_min}")]
    BelowGround { energy: f64, e_min: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("eigendecomposition failed to produce an orthonormal basis")]
    Eigen,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
