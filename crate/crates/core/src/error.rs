use thiserror::Error;

/// Errors produced by the dynamics, propagation and field pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parameter `{name}` out of range: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("state coincides with a primary (r1 or r2 = 0)")]
    Singularity,

    #[error("degenerate radius: offset from the target body is zero")]
    DegenerateRadius,

    #[error("non-finite value encountered during {0}")]
    NonFinite(&'static str),

    #[error("step count exceeded {0} before reaching the final anomaly")]
    MaxSteps(usize),

    #[error("step size underflow below h_min = {0}; problem too stiff at f = {1}")]
    StepUnderflow(f64, f64),

    #[error("event function does not change across the bracket [{0}, {1}]")]
    Bracket(f64, f64),

    #[error("root solver failed to converge within {0} iterations")]
    NoConvergence(usize),

    #[error("field is constant; min-max normalization is degenerate")]
    DegenerateRange,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("propagation failed at grid point ({row}, {col}): {source}")]
    AtGridPoint {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
