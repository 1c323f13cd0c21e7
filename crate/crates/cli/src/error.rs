use std::path::{Path, PathBuf};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_SOLVE: i32 = 5;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{context}: {source}")]
    Core { context: String, source: spmrf::Error },

    #[error("{0}")]
    Input(String),

    #[error("report: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(spmrf::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    /// Process exit status, one per failure class.
    pub fn exit_code(&self) -> i32 {
        use spmrf::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Csv(_) => EXIT_IO,
            CliError::Input(_) => EXIT_PARSE,
            CliError::Core { source, .. } => match source {
                E::Parse { .. }
                | E::MalformedPartition(_)
                | E::Image(_)
                | E::InvalidGeometry { .. }
                | E::InvalidPair { .. }
                | E::DuplicatePair { .. }
                | E::NonFinite(_) => EXIT_PARSE,
                E::GeometryMismatch { .. } | E::DimensionMismatch { .. } => EXIT_GEOMETRY,
                E::Io(_) => EXIT_IO,
                _ => EXIT_SOLVE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
