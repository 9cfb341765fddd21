//! HTTP deployment surface: accepts frames, returns detections and health
//! verdicts as JSON, maintains per-stream rolling alert state, and persists
//! append-only detection and alert logs.

pub mod alerts;
pub mod config;
pub mod logs;
pub mod server;
pub mod types;

pub use alerts::{AlertEvent, AlertRule};
pub use config::ServiceConfig;
pub use server::{start, start_replay, ServiceHandle};
pub use types::{PredictionResponse, Verdict};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("io error for {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] coopwatch_core::inference::InferenceError),
    #[error(transparent)]
    Dataset(#[from] coopwatch_core::dataset::DatasetError),
    #[error("log corrupt at {path} line {line}: {message}")]
    LogCorrupt { path: String, line: usize, message: String },
}
