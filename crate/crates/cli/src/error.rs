use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] zenodrive::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}
