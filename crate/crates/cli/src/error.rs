use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const SIMULATION: i32 = 3;
    pub const VERIFICATION: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("{0}")]
    Parse(String),
    #[error("{path}:{line}: {msg}")]
    Input {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Identification(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("{0} check(s) failed")]
    Verification(usize),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. }
            | CliError::Parse(_)
            | CliError::Input { .. }
            | CliError::Identification(_) => exit::VALIDATION,
            CliError::Simulation(_) => exit::SIMULATION,
            CliError::Verification(_) => exit::VERIFICATION,
            CliError::Io(_) => exit::OTHER,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
