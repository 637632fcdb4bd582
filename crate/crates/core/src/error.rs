use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate: infinite intersections (coincident circles)")]
    InfiniteIntersections,
    #[error("degenerate: direction undefined (point coincides with center)")]
    DirectionUndefined,
    #[error("infeasible projection: no candidate point satisfies every distance constraint")]
    InfeasibleProjection,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("zero channel: all singular values are below the rank tolerance")]
    ZeroChannel,
    #[error("regularization required: H^H H is singular at alpha = 0")]
    RegularizationRequired,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),
    #[error("region too small: {0}")]
    RegionTooSmall(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
