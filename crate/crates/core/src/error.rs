use thiserror::Error;

/// Errors surfaced by the synthesis and verification machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter was outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A kernel was evaluated exactly at one of its singular points.
    #[error("singular kernel evaluation at t={t}, x={x}")]
    SingularEvaluation { t: f64, x: f64 },

    /// A series realization produced a non-finite term; the index is the
    /// first offending term.
    #[error("degenerate draw: non-finite contribution at term {term}")]
    DegenerateDraw { term: usize },

    /// Too many degenerate draws were encountered while re-sampling
    /// marginals; this indicates a kernel/measure bug rather than bad luck.
    #[error("{count} degenerate draws out of {total} paths exceeds the 0.1% budget")]
    TooManyDegenerate { count: usize, total: usize },

    /// A quadrature failed to reach the requested tolerance. The best
    /// estimate and its error bound are carried along.
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    Accuracy { estimate: f64, error_bound: f64 },

    /// The integral defining a kernel norm grew past the overflow guard.
    #[error("kernel is not integrable: partial integral exceeded {guard:e}")]
    NonIntegrableKernel { guard: f64 },

    /// A process specification failed validation.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
