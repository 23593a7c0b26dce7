//! IO, configuration, providers, and orchestration around `insight-core`:
//! everything the `mine` binary does, exposed as a library so integration
//! tests can drive the pipeline in-process.

pub mod config;
pub mod dataset_io;
pub mod pipeline;
pub mod providers;
pub mod report;

pub use config::{CliArgs, Mode, RunConfig};
pub use pipeline::run_pipeline;
pub use report::RunReport;

/// Errors surfaced by the CLI pipeline.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    /// Bad or missing configuration; nothing has been written.
    #[error("config error: {0}")]
    Config(String),
    /// Filesystem failure.
    #[error("io error: {0}")]
    Io(String),
    /// Malformed input file (CSV dialect violation, bad sidecar).
    #[error("format error: {0}")]
    Format(String),
    /// A provider failure that is fatal for the selected mode.
    #[error("provider error: {0}")]
    Provider(String),
    /// Card generation produced nothing to analyze.
    #[error("card generation failed: {0}")]
    CardGeneration(String),
}
