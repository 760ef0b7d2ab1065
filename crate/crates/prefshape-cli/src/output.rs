//! CSV emission with a reproducibility sidecar.
//!
//! Every CSV gets a metadata record next to it (same basename, `.meta.json`)
//! holding the fully resolved configuration including the base seed, so the
//! file pair reproduces the run bit-exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use prefshape::{AggregateResult, CompetingResult};

use crate::error::{CliError, Result};

/// Sidecar record describing how a CSV was produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub label: String,
    pub kind: String,
    /// Fully resolved config, defaults included.
    pub config: serde_json::Value,
}

impl RunMetadata {
    pub fn single(experiment: &str, label: &str, config: &prefshape::SimConfig) -> Self {
        Self {
            tool: "prefshape".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: experiment.into(),
            label: label.into(),
            kind: "single".into(),
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }

    pub fn competing(experiment: &str, label: &str, config: &prefshape::CompetingConfig) -> Self {
        Self {
            tool: "prefshape".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: experiment.into(),
            label: label.into(),
            kind: "competing".into(),
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|source| {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    })?))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn metadata_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Writes `t,z1_mean,z1_std,regret_mean,cumregret_mean` rows (one per step)
/// plus the metadata sidecar. Floats use the shortest round-trip decimal.
pub fn emit_csv(result: &AggregateResult, path: &Path, meta: &RunMetadata) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,z1_mean,z1_std,regret_mean,cumregret_mean").map_err(io_err(path))?;
    for t in 0..result.horizon as usize {
        writeln!(
            w,
            "{},{},{},{},{}",
            t + 1,
            result.mean_share[t],
            result.std_share[t],
            result.mean_step_regret[t],
            result.mean_cum_regret[t]
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    write_metadata(&metadata_path(path), meta)
}

/// Writes the per-step mean popularity share of the first system per type
/// row: `t,s1_share_type1_mean,s1_share_type2_mean`.
pub fn emit_popularity_csv(result: &CompetingResult, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,s1_share_type1_mean,s1_share_type2_mean").map_err(io_err(path))?;
    for t in 0..result.aggregate.horizon as usize {
        writeln!(
            w,
            "{},{},{}",
            t + 1,
            result.mean_first_share[0][t],
            result.mean_first_share[1][t]
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_metadata(path: &Path, meta: &RunMetadata) -> Result<()> {
    let mut w = create(path)?;
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    writeln!(w, "{text}").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    writeln!(w, "{text}").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}
