use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("height {height} outside [0, {cap}]")]
    HeightOutOfRange { height: u32, cap: u32 },

    #[error("site ({i}, {j}) outside the {side}x{side} box")]
    SiteOutOfRange { i: usize, j: usize, side: usize },

    #[error("state space of {states} configurations exceeds the enumeration guard of {limit}")]
    StateSpaceTooLarge { states: u128, limit: u128 },

    #[error("coupled chains are not pointwise ordered")]
    NotOrdered,

    #[error("level must be at least 1, got {0}")]
    InvalidLevel(u32),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("body with half-extents ({0:.6}, {1:.6}) does not fit in the unit square")]
    BodyTooLarge(f64, f64),

    #[error("alpha_star equals alpha_c: no scaling limit at criticality")]
    Critical,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
