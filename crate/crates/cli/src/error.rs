//! CLI errors with the stage that failed and the matching exit code.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid problem: {0}")]
    Problem(selfadj::Error),
    #[error("{stage} failed: {source}")]
    Numerical { stage: &'static str, source: selfadj::Error },
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn problem(e: selfadj::Error) -> Self {
        CliError::Problem(e)
    }

    pub fn stage(stage: &'static str) -> impl Fn(selfadj::Error) -> Self {
        move |source| CliError::Numerical { stage, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Problem(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}
