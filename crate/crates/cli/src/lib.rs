//! Library surface of the batch front-end, exposed so integration tests
//! can drive the pipeline directly.

pub mod config;
pub mod format;
pub mod input;
pub mod pipeline;

pub use config::{AnalysisConfig, ConfigError};
pub use pipeline::{run_pipeline, PipelineOutcome, RunReport};
