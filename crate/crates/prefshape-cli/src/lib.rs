//! Experiment front-end for the prefshape simulator: named presets, JSON
//! config parsing, CSV emission with reproducibility sidecars, and
//! bound-vs-empirical reports.

pub mod config;
pub mod error;
pub mod output;
pub mod preset;
pub mod report;

pub use config::{
    parse_config_file, parse_config_str, parse_dynamics, parse_estimator, CompetingPlan,
    EtcLength, Experiment, PolicyChoice, RunPlan,
};
pub use error::CliError;
pub use output::{emit_csv, emit_popularity_csv, metadata_path, write_json, RunMetadata};
pub use report::{report_bounds, BoundCheck, BoundStatus};
