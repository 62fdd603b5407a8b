//! Configuration, file formats and the end-to-end pipeline.

pub mod config;
pub mod csv;
pub mod pgm;
pub mod pipeline;

pub use config::{PipelineConfig, Source, Track, OUT_DIR_ENV};
pub use csv::{load_trajectory_csv, save_trajectory_csv};
pub use pgm::save_distance_image;
pub use pipeline::{run_analysis, run_pipeline, PipelineOutcome};
