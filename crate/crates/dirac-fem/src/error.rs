use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("factorization failed at shift {shift:e}: {msg}")]
    Factorization { shift: f64, msg: String },
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("symmetry: {0}")]
    Symmetry(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Geometry(_) | Error::Parse(_) | Error::Invalid(_) => 2,
            _ => 3,
        }
    }
}
