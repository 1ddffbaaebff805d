use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("eigensolver did not converge for eigenvalue index {index}")]
    NonConvergence { index: usize },

    #[error("no halt before t = {limit:e} (degenerate spectrum?)")]
    NonHalting { limit: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("outside the scaling region: {0}")]
    ScalingRegion(String),

    #[error("integration blew up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
