use std::fmt;

use kuramoto_signed::Error;

/// A command failure, carrying the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// A checked property did not hold (exit 1).
    Assertion(String),
    /// Bad flags, config or input files (exit 2).
    Usage(anyhow::Error),
    /// The numerics broke down (exit 3).
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Assertion(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Assertion(m) => write!(f, "assertion failed: {m}"),
            Failure::Usage(e) => write!(f, "{e:#}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::NoConvergence(_) => Failure::Numerical(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Attaches context to an error while keeping its exit code.
pub trait Context<T> {
    fn context(self, what: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<Failure>> Context<T> for std::result::Result<T, E> {
    fn context(self, what: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| match e.into() {
            Failure::Usage(inner) => Failure::Usage(inner.context(what.to_string())),
            Failure::Numerical(inner) => Failure::Numerical(inner.context(what.to_string())),
            other => other,
        })
    }
}
