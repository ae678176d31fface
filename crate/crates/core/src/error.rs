use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("root weight theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
    #[error("node count {n} is below the minimum {min}")]
    TooFewNodes { n: usize, min: usize },
    #[error("{what}: size {n} exceeds the limit {max}")]
    TooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },
    #[error("argument must be positive, got {0}")]
    NonPositive(f64),
    #[error("invalid node labels i={i}, j={j} for a tree with {n} nodes")]
    InvalidLabels { i: usize, j: usize, n: usize },
    #[error("samples must be sorted in ascending order")]
    Unsorted,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("Picard iteration did not converge: drift {drift} after {generations} generations")]
    NotConverged { drift: f64, generations: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
