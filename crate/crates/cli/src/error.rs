use thiserror::Error;

/// Failures of the batch driver, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("backend capability error: {0}")]
    Capability(String),

    #[error("numerical consistency failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Capability(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<depthbound::Error> for CliError {
    fn from(e: depthbound::Error) -> Self {
        use depthbound::Error as E;
        if e.is_numerical() {
            return CliError::Numerical(e.to_string());
        }
        match e {
            E::TooManyQubits { .. } | E::Unsupported(_) => CliError::Capability(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
