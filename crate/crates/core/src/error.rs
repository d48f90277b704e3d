use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    /// No design point carries kernel mass at the requested covariate.
    #[error("out-of-support covariate: no kernel mass at x = {0:?}")]
    OutOfSupport(Vec<f64>),

    #[error("invalid dataset: {0}")]
    Data(String),

    #[error("bandwidth selection failed: {0}")]
    Selection(String),

    #[error("quantile regression fit failed: {0}")]
    Fit(String),

    #[error("singular design: {0}")]
    Singular(String),

    #[error("CP acceptance region empty; enlarge grid")]
    EmptyAcceptance,

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must be in (0,1), got {alpha}"))
    }
}
