//! Pipeline orchestration for the `tastekit` command: configuration,
//! stage execution over a seed-stamped run directory, reports, SVG figures
//! and a synthetic corpus generator.

pub mod artifacts;
pub mod bigrams;
pub mod config;
pub mod figures;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use config::{derive_seed, PipelineConfig};
pub use pipeline::{run_pipeline, PipelineError, Run, RunReport, Stage};
