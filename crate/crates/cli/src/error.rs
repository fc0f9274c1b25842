use curvnet_core::ErrorClass;
use thiserror::Error;

/// Command failure, printed as `error[class]: message`.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    MissingArtifact(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] curvnet_core::Error),
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::MissingArtifact(_) => "missing-artifact",
            CliError::Config(_) => "config",
            CliError::Core(e) => e.class().as_str(),
        }
    }

    /// 2 for I/O and missing files, 3 for bad input or configuration,
    /// 4 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::MissingArtifact(_) => 2,
            CliError::Config(_) => 3,
            CliError::Core(e) => match e.class() {
                ErrorClass::Io => 2,
                ErrorClass::Parse | ErrorClass::Validation | ErrorClass::TooShort => 3,
                ErrorClass::Numeric => 4,
            },
        }
    }
}
