use hecke_classical::ClassicalError;
use hecke_core::hecke::HeckeError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
}

impl CliError {
    /// Process exit code: every error reaching the top level is an input problem.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
