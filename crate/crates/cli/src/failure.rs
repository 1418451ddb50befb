use thiserror::Error;

/// A failed invocation, carrying the exit code it maps to.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Config(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Config(_) => 3,
        }
    }
}

impl From<histmix::Error> for Failure {
    fn from(e: histmix::Error) -> Self {
        use histmix::Error as E;
        match e {
            E::OutOfSupport(_) | E::Parse { .. } | E::Io(_) | E::NotInCell { .. } | E::SymbolOutOfRange { .. } => {
                Failure::Data(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}
