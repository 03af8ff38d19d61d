use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates an invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Geometry with a zero-length propagation path or coincident nodes.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Matrix/vector dimensions do not agree.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A DFT peak maps outside the visible sine region of the array.
    #[error("aliasing: arcsin argument {0} outside [-1, 1]")]
    Aliasing(f64),

    /// An angle search grid came out empty.
    #[error("empty search grid: {0}")]
    EmptyGrid(String),

    /// Eigendecomposition failure.
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    /// File or CSV output failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
