use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const ASSERTION: u8 = 2;
    pub const UNCERTIFIED: u8 = 3;
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{file}: line {line}, column {column}: {message}")]
    Parse { file: String, line: usize, column: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Table { path: String, message: String },
    #[error("task {task}: {source}")]
    Core { task: String, source: nevlab_core::Error },
}

impl LabError {
    pub fn input(path: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Input { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Core { source, .. } => core_exit_code(source),
            _ => exit::INPUT,
        }
    }
}

/// Numerical failures abort with the uncertified code; everything else is
/// a problem with the scenario.
pub fn core_exit_code(e: &nevlab_core::Error) -> u8 {
    use nevlab_core::Error as E;
    match e {
        E::Uncertified(_) | E::UncertifiedDivisor { .. } | E::BoundaryDegeneracy { .. } | E::InsufficientSamples => {
            exit::UNCERTIFIED
        }
        _ => exit::INPUT,
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
