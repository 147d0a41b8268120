//! Crate-wide error type.

use thiserror::Error;

/// Anything that can go wrong while building fields, decomposing them, or
/// searching for routes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("repulsion matrix not positive definite")]
    NotPositiveDefinite,
    #[error("repulsion matrix not symmetric")]
    NotSymmetric,
    #[error("degenerate line: endpoints coincide")]
    DegenerateLine,
    #[error("degenerate rectangle: zero area")]
    DegenerateRectangle,
    #[error("singular ellipse shape matrix")]
    SingularShape,
    #[error("collection must contain at least one sub-unit")]
    EmptyCollection,
    #[error("subdivision exceeded {0} levels; min cell size inconsistent with field size")]
    DepthExceeded(u32),
    #[error("point ({0}, {1}) lies outside the field")]
    OutOfField(f64, f64),
    #[error("start and goal are not connected in the routing network")]
    NoPath,
    #[error("endpoint cell lies below the traversable zone threshold")]
    BlockedEndpoint,
    #[error("force undefined: the position coincides with a restriction")]
    OnRestriction,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attach the offending path to a bare I/O error.
pub(crate) fn io_context(path: &std::path::Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}
