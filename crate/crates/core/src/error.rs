use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Caller passed inconsistent arguments (mismatched base points, dimensions, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// A point lies outside the manifold or the map's domain.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration error: {0}")]
    Integration(String),
    #[error("tolerance not reached: {what} (achieved {achieved:e}, required {required:e})")]
    Tolerance {
        what: String,
        achieved: f64,
        required: f64,
    },
    /// A linear map or a basis lost rank.
    #[error("rank error: {0}")]
    Rank(String),
    /// The metric restricted to a subspace is degenerate.
    #[error("degenerate restriction: {0}")]
    Degenerate(String),
    /// The set {|g(w,w)| = 1} is not compact (indefinite or degenerate restriction).
    #[error("non-compact pseudo-unit set: {0}")]
    NoncompactUnitSet(String),
    #[error("insufficient data: {finite} finite entries, at least {required} required")]
    InsufficientData { finite: usize, required: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    /// True for failures of numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Integration(_)
                | Error::Tolerance { .. }
                | Error::Rank(_)
                | Error::Numeric(_)
                | Error::InsufficientData { .. }
        )
    }
}
