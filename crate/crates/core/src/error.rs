use thiserror::Error;

/// Errors raised by the numerical operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no truncation within {cutoff} zeros meets the tail tolerance {tolerance:e} (best bound {best_bound:e})")]
    TailBoundExceeded {
        cutoff: usize,
        tolerance: f64,
        best_bound: f64,
    },

    #[error("evaluation point coincides with a pole at {0}")]
    PoleHit(f64),

    #[error("value with log-magnitude {0} is not representable as a double")]
    Unrepresentable(f64),

    #[error("scan range contains no window starts")]
    EmptyScanRange,

    #[error("fewer than two samples in the {0} third of the interval")]
    InsufficientSamples(&'static str),

    #[error("tail of the inner product is unbounded: windows differ and no decay model is available")]
    TailUnbounded,

    #[error("integrand decays too slowly: tail estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    SlowDecay { estimate: f64, tolerance: f64 },

    #[error("lambda = {lambda} lies outside the sampling window [-{window}, {window}]")]
    WindowTooSmall { lambda: f64, window: i64 },

    #[error("lambda = {0} is not a zero of the generating function")]
    NotAZero(f64),

    #[error("cutoff insufficient: omitted terms bounded by {tail:e}, tolerance {tolerance:e}")]
    CutoffInsufficient { tail: f64, tolerance: f64 },

    #[error("point {0} belongs to both zero sets; the construction needs simple zeros")]
    DoubleZero(f64),

    #[error("function decays too slowly for the conjugate kernel and no tail model was given")]
    TailModelMissing,

    #[error("singular point {0} is too close to the edge of the sampled range")]
    SingularityOnGridEdge(f64),

    #[error("argument unwrap is ambiguous between {0} and {1}: refine the grid")]
    UnwrapAmbiguity(f64, f64),

    #[error("excised mass fraction {0:e} exceeds the 1% limit")]
    ExcisionTooWide(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
