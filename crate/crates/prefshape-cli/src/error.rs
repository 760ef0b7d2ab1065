use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),

    #[error("unknown preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    #[error(transparent)]
    Lib(#[from] prefshape::Error),

    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
