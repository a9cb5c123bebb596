use alloc::boxed::Box;
use alloc::string::String;

use crate::field::SpectralField;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Component count or grid dimension does not fit the operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Argument outside the admissible range (negative time, p < 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A precondition on the data (divergence-free, mean-free, ...) is violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The grid cannot represent the requested data.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("time grid error: {0}")]
    TimeGrid(String),

    /// A non-finite coefficient appeared; carries the last finite state.
    #[error("blow-up detected at t = {time}")]
    BlowUp {
        time: f64,
        last_state: Box<SpectralField>,
    },

    /// Failure inside a named pipeline stage.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self.root(), Error::BlowUp { .. })
    }
}
