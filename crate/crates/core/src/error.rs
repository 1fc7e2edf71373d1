use thiserror::Error;

use crate::game::Regime;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero game: every row and column difference of the loss matrix vanishes")]
    ZeroGame,

    #[error("irrational entries: `{entry}` is not an exact rational number")]
    IrrationalEntries { entry: String },

    #[error("cannot parse matrix: {0}")]
    MatrixParse(String),

    #[error("arithmetic overflow while scaling the loss matrix to integers")]
    Overflow,

    #[error("horizon must be at least 1, got {0}")]
    InvalidHorizon(usize),

    #[error("learning rate must be finite and positive, got {0}")]
    InvalidEta(f64),

    #[error("regime mismatch: operation requires {expected}, game is {actual:?}")]
    RegimeMismatch { expected: &'static str, actual: Regime },

    #[error("horizon exceeded: state at t={time} has no successor within T={horizon}")]
    HorizonExceeded { time: usize, horizon: usize },

    #[error("resource limit: {what} = {requested} exceeds the cap of {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("policy `{policy}` produced no valid action at t={time}")]
    PolicyFault { policy: String, time: usize },

    #[error("no period found in a sequence of length {len}")]
    NoPeriodFound { len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("end node (value {end_value}, t={end_time}) is not accessible from (value {start_value}, t={start_time})")]
    NotAccessible {
        start_value: i64,
        start_time: usize,
        end_value: i64,
        end_time: usize,
    },

    #[error("horizon too short for the periodic construction: T={horizon} < {required}; use the full DP")]
    HorizonTooShort { horizon: usize, required: usize },

    #[error("invalid export data: {0}")]
    Format(String),
}

impl Error {
    /// True for errors caused by an invalid game definition.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ZeroGame
                | Error::IrrationalEntries { .. }
                | Error::MatrixParse(_)
                | Error::Overflow
                | Error::InvalidHorizon(_)
                | Error::InvalidEta(_)
        )
    }
}
