use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 validation failure, 2 usage or configuration, 3 capacity.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Capacity(_) => 3,
        }
    }
}

impl From<dyson_dd::Error> for CliError {
    fn from(err: dyson_dd::Error) -> Self {
        match err {
            dyson_dd::Error::Capacity(message) => CliError::Capacity(message),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(err.to_string()))
    }
}
