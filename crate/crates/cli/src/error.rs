use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    /// Infeasible or degenerate instance.
    #[error("{0}")]
    Instance(lincon::Error),

    #[error("I/O error: {0}")]
    Io(String),

    #[error(transparent)]
    Core(lincon::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Instance(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(_) => 1,
        }
    }
}

impl From<lincon::Error> for CliError {
    fn from(e: lincon::Error) -> Self {
        use lincon::Error as E;
        match e {
            E::Infeasible { .. } | E::Degenerate(_) => CliError::Instance(e),
            E::Io(io) => CliError::Io(io.to_string()),
            E::InvalidInput(_) | E::Parse { .. } | E::NoArms | E::Csv(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
