use std::io;

use nslab_core::Error as CoreError;
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Bad command line, config key or value.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_VALIDATION,
            LabError::Core(e) => match e.root() {
                CoreError::BlowUp { .. } => EXIT_BLOWUP,
                CoreError::Capacity(_) => EXIT_CAPACITY,
                _ => EXIT_VALIDATION,
            },
            LabError::Io(_) | LabError::Csv(_) | LabError::Format(_) => EXIT_OTHER,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Core(e) => match e.root() {
                CoreError::Dimension(_) => "dimension",
                CoreError::Domain(_) => "domain",
                CoreError::GridMismatch(_) => "grid_mismatch",
                CoreError::Contract(_) => "contract",
                CoreError::Capacity(_) => "capacity",
                CoreError::TimeGrid(_) => "time_grid",
                CoreError::BlowUp { .. } => "blow_up",
                CoreError::Stage { .. } => "stage",
            },
            LabError::Io(_) => "io",
            LabError::Csv(_) => "csv",
            LabError::Format(_) => "format",
        }
    }

    /// Machine-readable description, printed to stderr and written as
    /// `error.json`.
    pub fn to_json(&self) -> Value {
        let stage = match self {
            LabError::Core(CoreError::Stage { stage, .. }) => Some(*stage),
            _ => None,
        };
        let time = match self {
            LabError::Core(e) => match e.root() {
                CoreError::BlowUp { time, .. } => Some(*time),
                _ => None,
            },
            _ => None,
        };
        json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
            "stage": stage,
            "blowup_time": time,
        })
    }
}
