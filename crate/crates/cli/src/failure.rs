//! Exit-code taxonomy: 0 success, 1 I/O, 2 invalid input, 3 failed
//! diagnostic.

use std::fmt;
use std::process::ExitCode;

use cascadetrack_client::ClientError;

#[derive(Debug)]
pub enum Failure {
    Io(String),
    Validation(String),
    Diagnostic(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Diagnostic(_) => 3,
        })
    }

    pub fn io(context: impl fmt::Display, e: impl fmt::Display) -> Self {
        Failure::Io(format!("{context}: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Failure::Io(m) | Failure::Validation(m) | Failure::Diagnostic(m)) = self;
        // diagnostics are one line
        let line = m.split_whitespace().collect::<Vec<_>>().join(" ");
        f.write_str(&line)
    }
}

impl From<cascadetrack_core::Error> for Failure {
    fn from(e: cascadetrack_core::Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Validation { .. } | ClientError::NotFound(_) => Failure::Validation(e.to_string()),
            ClientError::Transport(_) | ClientError::Server { .. } => Failure::Io(e.to_string()),
        }
    }
}
