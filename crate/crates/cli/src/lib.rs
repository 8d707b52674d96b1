//! Configuration ingestion and the analyze → certify → rigidity pipeline.

pub mod config;
pub mod pipeline;
pub mod svg;

pub use config::{ConfigError, RunConfig};
pub use pipeline::{cmd_analyze, cmd_certify, cmd_rigidity, PipelineError};

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "TORAL_THREADS";
