use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: String,
        expected: String,
        found: String,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("leading coefficient is zero; polynomial is not of the requested degree")]
    DegenerateDegree,

    #[error("step size fell below min_step at t = {t}")]
    Stiffness { t: f64 },

    #[error("time {t} outside model domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is numerically defective (eigenvector condition number {condition:e})")]
    NonDiagonalizable { condition: f64 },

    #[error("eigenpath tracking failed on [{t_from}, {t_to}]: overlap {overlap:.3} below 0.5 (grid too coarse)")]
    TrackingFailure {
        t_from: f64,
        t_to: f64,
        overlap: f64,
    },

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("pair ({m}, {n}) is excluded (degenerate eigenvalues)")]
    ExcludedPair { m: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("model file: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            context: context.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for failures that stem from a degenerate or non-diagonalizable spectrum.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_) | Error::ExcludedPair { .. } | Error::NonDiagonalizable { .. }
        )
    }
}
