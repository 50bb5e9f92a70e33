use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("data: {0}")]
    Data(#[from] qprc_mnist::Error),

    #[error("dynamics: {0}")]
    Dynamics(#[from] qprc_core::Error),

    #[error("training: {0}")]
    Training(#[from] qprc_readout::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    /// Process exit status: 1 configuration, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io { .. } => 2,
            Error::Dynamics(qprc_core::Error::InvalidParameter(_)) => 1,
            Error::Training(qprc_readout::Error::InvalidConfig(_)) => 1,
            Error::Dynamics(_) | Error::Training(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
