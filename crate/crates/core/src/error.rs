use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("QBER undefined: detection probability is zero")]
    UndefinedQber,

    #[error("degenerate sample for `{0}`: zero detected count")]
    DegenerateSample(&'static str),

    #[error("single-photon yield lower bound is zero; estimation failed")]
    EstimationFailure,

    #[error("no feasible point in the search box")]
    InfeasibleBox,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}

/// Fails with a parameter error unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(param(name, reason))
    }
}
