use thiserror::Error;

/// Errors shared by every module of the laboratory.
///
/// The variants line up with the CLI exit codes: argument problems are
/// usage errors, resource errors mean a budget was exceeded, and a failed
/// residue construction is reported separately because it carries the best
/// partial assignment found.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("parameters infeasible: {inequality} ({lhs} vs {rhs})")]
    Infeasible {
        inequality: String,
        lhs: f64,
        rhs: f64,
    },

    #[error("construction failed after {attempts} attempts: {reason}")]
    ConstructionFailed {
        attempts: u32,
        reason: String,
        best: Option<Box<crate::erdos_rankin::PartialAssignment>>,
    },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
