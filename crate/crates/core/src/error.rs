use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("orientation error: determinant {det:e} is not positive")]
    Orientation { det: f64 },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("degenerate configuration: |lambda^2 - mu^2| = {gap:e} is below the degeneracy threshold {threshold:e}")]
    Degenerate { gap: f64, threshold: f64 },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("Kirchhoff-Love constraint violated: third column deviates from the cross product direction by {deviation:e} (relative)")]
    ConstraintViolation { deviation: f64 },

    #[error("first two columns are linearly dependent")]
    DegenerateColumns,

    #[error("matrix is rank deficient")]
    RankDeficient,

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no stationary solution: {reason} (best residual {best_residual:e} after {iterations} iterations)")]
    NoSolution {
        reason: String,
        best_residual: f64,
        iterations: usize,
    },
}
