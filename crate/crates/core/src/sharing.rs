//! Monte-Carlo simulation of the dit secret-sharing protocol: the dealer
//! and N−1 receivers measure a shared box with uniformly random settings,
//! keep rounds whose settings form an inequality basis, and reconstruct the
//! dealer's dit from the basis's term constraint.
//!
//! Transcripts are reproducible: each round derives its own RNG stream from
//! the seed and the round counter, so the simulation parallelizes without
//! changing a single byte of output.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::behavior::BehaviorTable;
use crate::error::{CoreError, Result};
use crate::functional::BellFunctional;
use crate::nsopt;
use crate::quantum::{QuantumModel, QuantumSupport};
use crate::scenario::Scenario;
use crate::tol;

/// Where the measured correlations come from.
#[derive(Debug, Clone)]
pub enum SourceModel {
    /// GHZ state with the chained measurement conventions, full grid.
    Quantum,
    /// The zero-value box (defined on the inequality bases).
    IdealBox,
    /// Any user-supplied behavior, e.g. loaded from a file.
    External(BehaviorTable),
}

impl SourceModel {
    fn kind(&self) -> &'static str {
        match self {
            SourceModel::Quantum => "quantum",
            SourceModel::IdealBox => "ideal-box",
            SourceModel::External(_) => "external",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub scenario: Scenario,
    pub rounds: u64,
    pub seed: u64,
    pub source: SourceModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub settings: Vec<u8>,
    pub outcomes: Vec<u8>,
    pub sifted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermEstimate {
    pub term_index: usize,
    pub samples: u64,
    /// Mean of the term's modular value over this term's sifted rounds.
    pub mean: f64,
    /// Sample variance of that mean (0 when fewer than two samples).
    pub variance_of_mean: f64,
}

/// Per-term empirical estimate of the functional's value.
#[derive(Debug, Clone, Serialize)]
pub struct BellEstimate {
    /// Regularized sum of per-term means; absent if any term went
    /// unsampled (missing terms are reported, never imputed).
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub per_term: Vec<TermEstimate>,
    pub missing_terms: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTranscript {
    pub scenario: Scenario,
    pub rounds: u64,
    pub seed: u64,
    pub source: String,
    /// True when the source is not defined on the full grid, so settings
    /// were drawn only from its supported bases.
    pub restricted_to_bases: bool,
    pub records: Vec<RoundRecord>,
    pub sifted_rounds: u64,
    pub sift_rate: f64,
    /// Sifted rounds where the constraint-forced dealer dit differs from
    /// the dealer's actual outcome.
    pub reconstruction_errors: u64,
    pub reconstruction_error_rate: f64,
    /// `counts[party][outcome]` over sifted rounds.
    pub sifted_outcome_counts: Vec<Vec<u64>>,
    pub bell_estimate: BellEstimate,
}

/// Runs the protocol: uniform random settings, outcomes sampled from the
/// source, sifting on basis membership, reconstruction via the basis's term
/// constraint.
pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolTranscript> {
    let scenario = config.scenario;
    if scenario.n_parties() < 3 {
        return Err(CoreError::InvalidScenario(
            "secret sharing needs a dealer and at least two receivers".into(),
        ));
    }
    if config.rounds == 0 {
        return Err(CoreError::InvalidInput("at least one round".into()));
    }
    let functional = BellFunctional::build(&scenario)?;
    let behavior = match &config.source {
        SourceModel::Quantum => QuantumModel::new(&scenario)?.behavior(QuantumSupport::FullGrid)?,
        SourceModel::IdealBox => nsopt::ideal_box(&scenario)?,
        SourceModel::External(table) => {
            if table.scenario() != &scenario {
                return Err(CoreError::InvalidInput(
                    "external behavior's scenario does not match the protocol's".into(),
                ));
            }
            table.clone()
        }
    };
    for basis in functional.inequality_bases() {
        if !behavior.supports(&basis) {
            return Err(CoreError::UnsupportedSetting {
                settings: basis.to_vec(),
            });
        }
    }
    let restricted = !behavior.is_full_grid();
    let supported = behavior.supported_settings();

    let n = scenario.n_parties();
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    let records: Vec<RoundRecord> = (0..config.rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(round + 1);
            let settings: Vec<u8> = if restricted {
                supported[rng.random_range(0..supported.len())].to_vec()
            } else {
                (0..n).map(|_| rng.random_range(1..=m)).collect()
            };
            let block = behavior
                .block(&settings)
                .expect("settings drawn from support");
            let u: f64 = rng.random();
            let mut cumulative = 0.0;
            let mut index = block.len() - 1;
            for (ri, &p) in block.iter().enumerate() {
                cumulative += p.max(0.0);
                if u < cumulative {
                    index = ri;
                    break;
                }
            }
            let outcomes = scenario.outcome_tuple(index).to_vec();
            let sifted = functional.term_for_basis(&settings).is_some();
            RoundRecord {
                settings,
                outcomes,
                sifted,
            }
        })
        .collect();

    let mut sifted_rounds = 0u64;
    let mut reconstruction_errors = 0u64;
    let mut sifted_outcome_counts = vec![vec![0u64; d as usize]; n];
    let mut samples = vec![(0u64, 0.0f64, 0.0f64); functional.terms().len()];
    for record in &records {
        if !record.sifted {
            continue;
        }
        sifted_rounds += 1;
        for (p, &r) in record.outcomes.iter().enumerate() {
            sifted_outcome_counts[p][r as usize] += 1;
        }
        let term_index = functional
            .term_index_for_basis_index(scenario.setting_index(&record.settings)?)
            .expect("sifted settings are a basis");
        let term = &functional.terms()[term_index];
        if term.forced_outcome(0, &record.outcomes, m, d) != record.outcomes[0] {
            reconstruction_errors += 1;
        }
        let w = term.outcome_weight(&record.outcomes, m, d) as f64;
        let entry = &mut samples[term_index];
        entry.0 += 1;
        entry.1 += w;
        entry.2 += w * w;
    }

    let mut per_term = Vec::with_capacity(samples.len());
    let mut missing_terms = Vec::new();
    let mut mean_sum = 0.0;
    let mut variance_sum = 0.0;
    for (term_index, &(count, sum, sum_sq)) in samples.iter().enumerate() {
        if count == 0 {
            missing_terms.push(term_index);
            continue;
        }
        let mean = sum / count as f64;
        let variance_of_mean = if count > 1 {
            let sample_var = (sum_sq - sum * sum / count as f64) / (count as f64 - 1.0);
            (sample_var / count as f64).max(0.0)
        } else {
            0.0
        };
        mean_sum += mean;
        variance_sum += variance_of_mean;
        per_term.push(TermEstimate {
            term_index,
            samples: count,
            mean,
            variance_of_mean,
        });
    }
    let bell_estimate = if missing_terms.is_empty() {
        BellEstimate {
            value: Some(functional.regularization() * mean_sum),
            std_error: Some(functional.regularization() * variance_sum.sqrt()),
            per_term,
            missing_terms,
        }
    } else {
        BellEstimate {
            value: None,
            std_error: None,
            per_term,
            missing_terms,
        }
    };

    Ok(ProtocolTranscript {
        scenario,
        rounds: config.rounds,
        seed: config.seed,
        source: config.source.kind().to_string(),
        restricted_to_bases: restricted,
        sift_rate: sifted_rounds as f64 / config.rounds as f64,
        sifted_rounds,
        reconstruction_errors,
        reconstruction_error_rate: if sifted_rounds > 0 {
            reconstruction_errors as f64 / sifted_rounds as f64
        } else {
            0.0
        },
        sifted_outcome_counts,
        bell_estimate,
        records,
    })
}

/// One chi-square uniformity test over sifted-round outcome counts.
#[derive(Debug, Clone, Serialize)]
pub struct UniformityTest {
    pub label: String,
    pub counts: Vec<u64>,
    pub chi_square: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
}

fn chi_square_uniform(label: String, counts: Vec<u64>) -> UniformityTest {
    let total: u64 = counts.iter().sum();
    let cells = counts.len() as f64;
    let expected = total as f64 / cells;
    let chi_square = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let df = counts.len() as u64 - 1;
    let p_value = 1.0
        - ChiSquared::new(df as f64)
            .expect("positive degrees of freedom")
            .cdf(chi_square);
    UniformityTest {
        label,
        counts,
        chi_square,
        degrees_of_freedom: df,
        p_value,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SecurityReport {
    pub sifted_rounds: u64,
    /// Uniformity of each receiver's (and the dealer's) sifted outcomes.
    pub single_party: Vec<UniformityTest>,
    /// Uniformity of each `(N-1)`-party subset's joint sifted outcomes.
    pub subsets: Vec<UniformityTest>,
    pub bell_estimate: BellEstimate,
    /// Marginal bound `1/d^(N-1) + d(N-1)ε̂/4` at the estimated value.
    pub marginal_bound_at_estimate: Option<f64>,
    /// Set when any single party's outcomes are detectably nonuniform
    /// (p-value below 1e-9): a party's share leaks on its own.
    pub insecure: bool,
    pub notes: Vec<String>,
}

/// Chi-square uniformity statistics over the sifted rounds, plus the
/// marginal bound evaluated at the empirical functional estimate.
pub fn security_report(transcript: &ProtocolTranscript) -> Result<SecurityReport> {
    if transcript.sifted_rounds < 100 {
        return Err(CoreError::InsufficientData(format!(
            "security statistics need at least 100 sifted rounds, got {}",
            transcript.sifted_rounds
        )));
    }
    let scenario = &transcript.scenario;
    let n = scenario.n_parties();
    let d = scenario.n_outcomes() as usize;

    let single_party: Vec<UniformityTest> = transcript
        .sifted_outcome_counts
        .iter()
        .enumerate()
        .map(|(p, counts)| chi_square_uniform(format!("party {p}"), counts.clone()))
        .collect();

    let mut subsets = Vec::with_capacity(n);
    for dropped in (0..n).rev() {
        let subset: Vec<usize> = (0..n).filter(|&p| p != dropped).collect();
        let mut counts = vec![0u64; d.pow(subset.len() as u32)];
        for record in transcript.records.iter().filter(|r| r.sifted) {
            let idx = subset
                .iter()
                .fold(0usize, |acc, &p| acc * d + record.outcomes[p] as usize);
            counts[idx] += 1;
        }
        subsets.push(chi_square_uniform(format!("parties {subset:?}"), counts));
    }

    let mut notes = Vec::new();
    let insecure = single_party
        .iter()
        .any(|t| t.p_value < tol::INSECURE_P_VALUE);
    if insecure {
        for t in single_party
            .iter()
            .filter(|t| t.p_value < tol::INSECURE_P_VALUE)
        {
            notes.push(format!(
                "INSECURE: {} outcomes are nonuniform (p = {:.3e})",
                t.label, t.p_value
            ));
        }
    }
    if !transcript.bell_estimate.missing_terms.is_empty() {
        notes.push(format!(
            "{} of {} functional terms were never sampled",
            transcript.bell_estimate.missing_terms.len(),
            transcript.bell_estimate.missing_terms.len() + transcript.bell_estimate.per_term.len()
        ));
    }
    let marginal_bound_at_estimate = transcript.bell_estimate.value.map(|eps| {
        1.0 / (d as f64).powi(n as i32 - 1) + d as f64 * (n as f64 - 1.0) * eps.max(0.0) / 4.0
    });

    Ok(SecurityReport {
        sifted_rounds: transcript.sifted_rounds,
        single_party,
        subsets,
        bell_estimate: transcript.bell_estimate.clone(),
        marginal_bound_at_estimate,
        insecure,
        notes,
    })
}
