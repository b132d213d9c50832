use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sector dimension D({d},{n}) = {dim} exceeds the cap {cap}")]
    DimensionCap {
        d: usize,
        n: usize,
        dim: u128,
        cap: usize,
    },

    #[error("{what} is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { what: String, deviation: f64 },

    #[error("truncation too small: tail mass {tail:.3e} exceeds tolerance {tol:.3e} at n_max = {n_max}")]
    TailTooLarge { tail: f64, tol: f64, n_max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("construction routes disagree by {deviation:.3e} (tolerance {tol:.1e}) in {what}")]
    RouteMismatch {
        what: String,
        deviation: f64,
        tol: f64,
    },

    #[error("invariant drift {drift:.3e} exceeds {limit:.3e} ({what}); reduce the step size")]
    Drift {
        what: &'static str,
        drift: f64,
        limit: f64,
    },

    #[error("state has no weight below the cutoff {cutoff}")]
    EmptyTruncation { cutoff: usize },

    #[error("oracle size cap exceeded: {0}")]
    OracleCap(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
