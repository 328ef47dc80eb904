//! Numerical tolerances and resource caps used across the crate.
//!
//! Every comparison against an analytic value goes through one of these
//! constants so that the accuracy contract of the crate is pinned in a single
//! place.  Functions that accept a tolerance parameter default to the
//! constant named here.

/// Normalization tolerance: probabilities for one setting tuple must sum to 1
/// within this bound, and entries as low as `-NORMALIZATION` are accepted and
/// clamped to 0 on read (they arise as dust from LP solutions).
pub const NORMALIZATION: f64 = 1e-9;

/// Nonsignaling tolerance: marginal distributions of any subset of parties
/// may differ across the dropped parties' settings by at most this much.
pub const NONSIGNALING: f64 = 1e-9;

/// Tolerance for closed-form identities: two exact expressions evaluated in
/// floating point (dual-route probabilities, permutation invariance, value
/// equality across party counts at fixed `M`, summation-order independence).
pub const IDENTITY: f64 = 1e-12;

/// Pivot tolerance of the floating-point simplex: entries smaller than this
/// in magnitude are treated as zero during pivoting.
pub const LP_PIVOT: f64 = 1e-9;

/// Feasibility tolerance for behaviors extracted from LP solutions
/// (normalization and nonsignaling residuals).
pub const LP_FEASIBILITY: f64 = 1e-8;

/// Tolerance when comparing an LP objective against a predicted value.
pub const LP_OBJECTIVE: f64 = 1e-7;

/// Slack added to analytic bounds when checking them against computed
/// behaviors, absorbing accumulated floating-point error.
pub const BOUND_SLACK: f64 = 1e-9;

/// Maximum admissible round-trip error for serialized probabilities.
pub const SERIALIZATION: f64 = 1e-15;

/// Default cap on dense table cells (`M^N * d^N`).
pub const DEFAULT_CELL_CAP: u128 = 10_000_000;

/// Default cap on exhaustive strategy evaluations.
pub const DEFAULT_ENUM_CAP: u128 = 100_000_000;

/// Default cap on LP columns (variables plus slacks).
pub const DEFAULT_LP_COLUMN_CAP: usize = 20_000;

/// Largest variable count for which the exact rational LP mode is offered.
pub const EXACT_LP_VAR_LIMIT: usize = 2_000;

/// Single-party uniformity p-values below this mark a transcript insecure.
pub const INSECURE_P_VALUE: f64 = 1e-9;
