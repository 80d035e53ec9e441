use std::fmt;

/// Splits failures by exit code: bad input is 1, anything after validation is 2.
#[derive(Debug)]
pub enum CliError {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(e) => write!(f, "invalid input: {e:#}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid(msg: impl fmt::Display) -> CliError {
    CliError::Validation(anyhow::anyhow!("{msg}"))
}

pub trait OrInvalid<T> {
    /// Reclassifies an error as a validation failure.
    fn or_invalid(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> OrInvalid<T> for Result<T, E> {
    fn or_invalid(self) -> CliResult<T> {
        self.map_err(|e| CliError::Validation(e.into()))
    }
}
