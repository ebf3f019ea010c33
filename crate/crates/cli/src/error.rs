use pv_vacuum::VacuumError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Vacuum(#[from] VacuumError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// The computation ran but did not meet its targets.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Vacuum(VacuumError::InvalidInput(_)) => 2,
            _ => 1,
        }
    }
}
