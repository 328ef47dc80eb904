//! Numerical laboratory for chained multipartite Svetlichny inequalities.
//!
//! The objects of study are correlation experiments in which `N` parties each
//! choose one of `M` settings and obtain one of `d` outcomes.  A behavior is
//! the table of joint conditional probabilities `P(outcomes | settings)`.  On
//! top of that data model the crate provides:
//!
//! * [`functional`] — the chained Svetlichny Bell functional, a regularized
//!   sum of `2·M^(N-1)` modular outcome expectations whose value is at least
//!   `d - 1` for every model in which any bipartition of the parties behaves
//!   classically;
//! * [`quantum`] — the generalized GHZ state with the phase-graded Fourier
//!   measurement bases that violate the inequality maximally, plus the
//!   large-`M` asymptotics of the violation;
//! * [`classical`] — exhaustive minimization over local and bilocal
//!   deterministic strategies, certifying the bound by enumeration;
//! * [`lp`] / [`nsopt`] — a small generic simplex solver (floating point and
//!   exact rational) and the nonsignaling-polytope optimizations built on it:
//!   polytope minima, marginal-probability probes, monogamy probes, and a
//!   uniqueness analysis of the zero-value behavior;
//! * [`checks`] — self-contained verifiers for the marginal bound, the
//!   expectation floor, the overlap bound, and related identities;
//! * [`sharing`] — a seeded Monte Carlo simulation of the secret-sharing
//!   protocol that the correlations support.
//!
//! Conventions used at every interface: parties are indexed from 0, settings
//! are 1-based (`1..=M`), outcomes are 0-based (`0..d`).

pub mod behavior;
pub mod checks;
pub mod classical;
pub mod error;
pub mod functional;
pub mod lp;
pub mod nsopt;
pub mod quantum;
pub mod scenario;
pub mod sharing;
pub mod tol;

pub use behavior::{BehaviorTable, NonsignalingReport};
pub use error::{CoreError, Result};
pub use functional::{BellFunctional, ChainedTerm, TermKind, TermVariable};
pub use quantum::QuantumModel;
pub use scenario::{OutcomeTuple, Scenario, SettingTuple};

/// Fixes the number of worker threads used by the parallel enumeration and
/// simulation routines.  Must run before any parallel work; a second call, or
/// a call after the default pool has already been used, is an error.
pub fn configure_threads(n_threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n_threads)
        .build_global()
        .map_err(|e| CoreError::InvalidInput(format!("thread pool: {e}")))
}
