use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A spatial offset with the wrong parity for the requested kernel.
    #[error("{what}: spatial offset must be {expected}, got j = {j}")]
    Parity {
        what: &'static str,
        expected: &'static str,
        j: i64,
    },

    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The uniform-translation mode carries flat (Lebesgue) weight and has
    /// no finite variance.
    #[error("zero mode has Lebesgue weight, no finite variance")]
    ZeroMode,

    /// A dense form too large for the brute-force path.
    #[error("dense form with {vars} variables exceeds the cap of {cap}")]
    TooLarge { vars: usize, cap: usize },

    /// Observables that do not fit inside the finite torus.
    #[error("finite-size guard violated: {0}")]
    FiniteSize(String),

    /// An estimator asked for data the snapshot stream never covered.
    #[error("insufficient snapshots: {0}")]
    InsufficientData(String),

    /// Batch-means error bars need a minimum number of blocks.
    #[error("batch-means stderr needs at least {need} blocks, have {have}")]
    TooFewBlocks { have: usize, need: usize },

    /// A numerical routine failed to reach its accuracy target.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
