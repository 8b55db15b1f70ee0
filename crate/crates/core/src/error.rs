use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Input text that does not parse under its declared format.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("config: {0}")]
    Config(String),

    /// Failure inside one stage of the batch pipeline.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptFile(msg.into())
    }

    /// Process exit code for the CLI.
    ///
    /// `2` is left to the argument parser (usage errors).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::CorruptFile(_) => 3,
            Error::Config(_) => 4,
            Error::Stage { .. } => 5,
            Error::InvalidArgument(_) | Error::InvalidState(_) | Error::UndefinedCorrelation(_) => {
                6
            }
            Error::Io(_) => 7,
        }
    }
}

/// Tags an error with the pipeline stage that produced it.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
