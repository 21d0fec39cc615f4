use decoupling_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("refused: {0}")]
    Budget(LabError),
    #[error(transparent)]
    Lab(LabError),
    #[error("{0}")]
    Failure(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Serialize(String),
}

impl CliError {
    /// 1 for failures, 2 for usage errors, 3 for budget refusals.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Lab(_) | CliError::Failure(_) | CliError::Io(_) | CliError::Serialize(_) => 1,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::BudgetExceeded { .. } => CliError::Budget(e),
            LabError::InvalidDelta(_) | LabError::InvalidExponent(_) | LabError::InvalidParameter(_) | LabError::TooFewPoints { .. } => {
                CliError::Usage(e.to_string())
            }
            LabError::Undersampled(_) => CliError::Lab(e),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}
