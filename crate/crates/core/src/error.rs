//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Everything that can go wrong while building or analyzing correlation data.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Scenario parameters outside the supported range (`N >= 2`, `M >= 2`,
    /// `d >= 2`, sizes below the caps).
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A requested table would exceed the configured cell cap.
    #[error("table needs {needed} cells which exceeds the cap of {cap}")]
    TableTooLarge { needed: u128, cap: u128 },

    /// An exhaustive enumeration would exceed the configured evaluation cap.
    #[error("enumeration needs {needed} evaluations which exceeds the cap of {cap}")]
    EnumerationTooLarge { needed: u128, cap: u128 },

    /// A linear program would exceed the configured column cap.
    #[error("linear program needs {needed} columns which exceeds the cap of {cap}")]
    LpTooLarge { needed: usize, cap: usize },

    /// A setting tuple outside the table's support was queried.
    #[error("setting tuple {settings:?} is not supported by this table")]
    UnsupportedSetting { settings: Vec<u8> },

    /// A probability block failed normalization.
    #[error("probabilities for settings {settings:?} sum to {sum} (not 1 within tolerance)")]
    NotNormalized { settings: Vec<u8>, sum: f64 },

    /// A table entry is NaN or below the negativity tolerance.
    #[error("invalid probability entry {value} at settings {settings:?}")]
    InvalidEntry { settings: Vec<u8>, value: f64 },

    /// An operation that needs the full setting grid was called on a sparse
    /// table.
    #[error("{operation} requires a full-grid table but this one is sparse")]
    SparseUnsupported { operation: &'static str },

    /// A party permutation was malformed.
    #[error("invalid party permutation {perm:?} for {n_parties} parties")]
    InvalidPermutation { perm: Vec<usize>, n_parties: usize },

    /// Caller-supplied arguments that do not fit the request.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The simplex solver exceeded its iteration guard or lost feasibility.
    #[error("linear program failed numerically: {0}")]
    LpNumerical(String),

    /// Not enough data to compute a statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// JSON (de)serialization failure.
    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}
