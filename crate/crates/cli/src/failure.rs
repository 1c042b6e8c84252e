use std::fmt;
use std::process::ExitCode;

/// Command failure, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag combinations (exit 2).
    Usage(String),
    /// Anything that went wrong while running (exit 1).
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage error: {msg}"),
            Failure::Runtime(err) => write!(f, "error: {err:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(err: E) -> Self {
        Failure::Runtime(err.into())
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

/// Turns a validation error from the core crate into a usage error.
pub fn invalid<T>(res: nnsr_core::Result<T>) -> CmdResult<T> {
    res.map_err(|e| Failure::Usage(e.to_string()))
}
