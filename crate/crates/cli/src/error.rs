use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config {path}:{line}: {msg}")]
    Config { path: String, line: usize, msg: String },

    #[error(transparent)]
    Core(#[from] mmq_core::Error),

    #[error(transparent)]
    Fd(#[from] mmq_fd::FdError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
