use thiserror::Error;

/// Pipeline stage an error surfaced in; decides how core errors are classified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Solve,
    Write,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    /// 1 config, 2 solver, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn from_core(stage: Stage, context: &str, err: gidseg::Error) -> Self {
        use gidseg::Error as E;
        let msg = format!("{context}: {err}");
        match (&err, stage) {
            (E::Config(_), _) | (_, Stage::Config) => CliError::Config(msg),
            (
                E::Io(_)
                | E::MalformedHeader { .. }
                | E::Truncated { .. }
                | E::UnsupportedFormat { .. },
                _,
            ) => CliError::Io(msg),
            (_, Stage::Load | Stage::Write) => CliError::Io(msg),
            (_, Stage::Solve) => CliError::Solver(msg),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
