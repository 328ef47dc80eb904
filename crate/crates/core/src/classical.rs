//! Exhaustive minimization of the chained functional over deterministic
//! models: fully local strategies and bilocal (two-group) strategies where
//! each group answers as an unrestricted joint function of its settings.
//!
//! Deterministic points are the extreme points of both polytopes, so these
//! minima certify the bounds for arbitrary (mixed) local and bilocal models
//! by convexity.  Enumeration is exhaustive and capped, never heuristic.

use rayon::prelude::*;
use serde::Serialize;

use crate::behavior::BehaviorTable;
use crate::error::{CoreError, Result};
use crate::functional::BellFunctional;
use crate::scenario::Scenario;

/// One deterministic assignment: each party answers a fixed outcome for
/// each of its settings, independently of everyone else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalStrategy {
    n_parties: usize,
    n_settings: u8,
    /// `table[p * M + (s - 1)]` is party `p`'s outcome at setting `s`.
    table: Vec<u8>,
}

impl LocalStrategy {
    /// Decodes a counter in `0..d^(N·M)`.  The counter is read as base-`d`
    /// digits with party 0 / setting 1 most significant, so counter order is
    /// lexicographic order on the assignment table.
    pub fn from_counter(scenario: &Scenario, counter: u64) -> Self {
        let n = scenario.n_parties();
        let m = scenario.n_settings() as usize;
        let d = scenario.n_outcomes() as u64;
        let mut table = vec![0u8; n * m];
        let mut rest = counter;
        for slot in (0..n * m).rev() {
            table[slot] = (rest % d) as u8;
            rest /= d;
        }
        LocalStrategy {
            n_parties: n,
            n_settings: scenario.n_settings(),
            table,
        }
    }

    pub fn outcome(&self, party: usize, setting: u8) -> u8 {
        self.table[party * self.n_settings as usize + (setting as usize - 1)]
    }

    /// Per-party outcome lists, one entry per setting.
    pub fn assignments(&self) -> Vec<Vec<u8>> {
        let m = self.n_settings as usize;
        (0..self.n_parties)
            .map(|p| self.table[p * m..(p + 1) * m].to_vec())
            .collect()
    }

    pub fn to_behavior(&self, scenario: &Scenario) -> Result<BehaviorTable> {
        BehaviorTable::from_local_assignment(scenario, &self.assignments())
    }
}

/// Minimum of the functional over all local deterministic strategies.
#[derive(Debug, Clone, Serialize)]
pub struct LocalMinimum {
    pub minimum: f64,
    /// Integer sum of term values at the witness; `minimum` is this times
    /// the functional's regularization.
    pub weight_total: u64,
    pub witness: LocalStrategy,
    pub witness_counter: u64,
    pub evaluations: u128,
}

/// Number of strategies, or an error if it exceeds the cap.
fn strategy_count(base: u128, digits: u32, cap: u128) -> Result<u128> {
    let needed = base
        .checked_pow(digits)
        .ok_or(CoreError::EnumerationTooLarge {
            needed: u128::MAX,
            cap,
        })?;
    if needed > cap {
        return Err(CoreError::EnumerationTooLarge { needed, cap });
    }
    Ok(needed)
}

/// Advances a little-endian-in-slot-order odometer; each digit runs over
/// `0..base`.  Returns false on wrap-around past the last strategy.
fn increment(digits: &mut [u32], base: u32) -> bool {
    for digit in digits.iter_mut().rev() {
        *digit += 1;
        if *digit < base {
            return true;
        }
        *digit = 0;
    }
    false
}

fn decode(mut counter: u64, digits: usize, base: u64) -> Vec<u32> {
    let mut out = vec![0u32; digits];
    for slot in (0..digits).rev() {
        out[slot] = (counter % base) as u32;
        counter /= base;
    }
    out
}

const CHUNK: u64 = 1 << 14;

/// Exhaustive minimum over all `d^(N·M)` local deterministic strategies.
/// The witness is the lexicographically smallest minimizer.
pub fn min_local(functional: &BellFunctional, cap: u128) -> Result<LocalMinimum> {
    let scenario = *functional.scenario();
    let n = scenario.n_parties();
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    let slots = n * m as usize;
    let total = strategy_count(d as u128, slots as u32, cap)? as u64;

    // Each term touches one fixed table slot per party.
    let term_slots: Vec<Vec<usize>> = functional
        .terms()
        .iter()
        .map(|t| {
            t.settings(m)
                .iter()
                .enumerate()
                .map(|(p, &s)| p * m as usize + (s as usize - 1))
                .collect()
        })
        .collect();

    let n_chunks = total.div_ceil(CHUNK);
    let best = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut digits = decode(start, slots, d as u64);
            let mut outcomes = vec![0u8; n];
            let mut best: Option<(u64, u64)> = None;
            for counter in start..end {
                let mut weight = 0u64;
                for (term, term_slots) in functional.terms().iter().zip(&term_slots) {
                    for (p, &slot) in term_slots.iter().enumerate() {
                        outcomes[p] = digits[slot] as u8;
                    }
                    weight += term.outcome_weight(&outcomes, m, d) as u64;
                }
                if best.is_none_or(|(w, _)| weight < w) {
                    best = Some((weight, counter));
                }
                increment(&mut digits, d as u32);
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
        )
        .expect("strategy space is nonempty");

    Ok(LocalMinimum {
        minimum: best.0 as f64 * functional.regularization(),
        weight_total: best.0,
        witness: LocalStrategy::from_counter(&scenario, best.1),
        witness_counter: best.1,
        evaluations: total as u128,
    })
}

/// One group of a bipartition: a joint deterministic response table mapping
/// each joint setting tuple of the group to a joint outcome tuple.
#[derive(Debug, Clone, Serialize)]
pub struct GroupStrategy {
    pub parties: Vec<usize>,
    /// `(joint settings, joint outcomes)` rows in lexicographic setting
    /// order.
    pub table: Vec<(Vec<u8>, Vec<u8>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BilocalWitness {
    pub group_a: GroupStrategy,
    pub group_b: GroupStrategy,
}

/// Minimum over one fixed bipartition.
#[derive(Debug, Clone, Serialize)]
pub struct BipartitionMinimum {
    /// Parties in the first group; always contains party 0.
    pub group_a: Vec<usize>,
    pub group_b: Vec<usize>,
    pub minimum: f64,
    pub weight_total: u64,
    pub witness: BilocalWitness,
    pub evaluations: u128,
}

/// Minimum over every bipartition.
#[derive(Debug, Clone, Serialize)]
pub struct BilocalMinimum {
    pub minimum: f64,
    pub weight_total: u64,
    /// Index into `per_bipartition` of the first group attaining the
    /// minimum.
    pub witness_bipartition: usize,
    pub per_bipartition: Vec<BipartitionMinimum>,
    pub evaluations: u128,
}

/// Geometry of one group inside a bipartition enumeration.
struct GroupSpace {
    parties: Vec<usize>,
    n_joint_settings: usize,
    joint_outcome_base: u32,
    /// joint outcome index → per-party outcomes, in `parties` order.
    outcome_decode: Vec<Vec<u8>>,
}

impl GroupSpace {
    fn new(parties: Vec<usize>, m: u8, d: u8) -> Self {
        let k = parties.len();
        let n_joint_settings = (m as usize).pow(k as u32);
        let joint_outcome_base = (d as u32).pow(k as u32);
        let outcome_decode = (0..joint_outcome_base)
            .map(|mut jo| {
                let mut out = vec![0u8; k];
                for slot in (0..k).rev() {
                    out[slot] = (jo % d as u32) as u8;
                    jo /= d as u32;
                }
                out
            })
            .collect();
        GroupSpace {
            parties,
            n_joint_settings,
            joint_outcome_base,
            outcome_decode,
        }
    }

    /// Lexicographic index of this group's restriction of a full setting
    /// tuple.
    fn joint_setting_index(&self, settings: &[u8], m: u8) -> usize {
        let mut idx = 0usize;
        for &p in &self.parties {
            idx = idx * m as usize + (settings[p] as usize - 1);
        }
        idx
    }

    fn strategy_count(&self, cap: u128) -> Result<u128> {
        strategy_count(
            self.joint_outcome_base as u128,
            self.n_joint_settings as u32,
            cap,
        )
    }

    fn witness(&self, digits: &[u32], m: u8) -> GroupStrategy {
        let k = self.parties.len();
        let mut table = Vec::with_capacity(self.n_joint_settings);
        let mut joint = vec![1u8; k];
        for &digit in digits {
            table.push((joint.clone(), self.outcome_decode[digit as usize].clone()));
            for slot in (0..k).rev() {
                joint[slot] += 1;
                if joint[slot] <= m {
                    break;
                }
                joint[slot] = 1;
            }
        }
        GroupStrategy {
            parties: self.parties.clone(),
            table,
        }
    }
}

/// All bipartitions of the parties, each as the sorted group containing
/// party 0.  There are `2^(N-1) − 1` of them.
pub fn bipartitions(n_parties: usize) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    for mask in 0u32..(1 << (n_parties - 1)) {
        let mut group = vec![0usize];
        for p in 1..n_parties {
            if mask & (1 << (p - 1)) != 0 {
                group.push(p);
            }
        }
        if group.len() < n_parties {
            groups.push(group);
        }
    }
    groups
}

/// Exhaustive minimum over deterministic strategies of one bipartition,
/// given as the group containing party 0.
pub fn min_bipartition(
    functional: &BellFunctional,
    group_a: &[usize],
    cap: u128,
) -> Result<BipartitionMinimum> {
    let scenario = *functional.scenario();
    let n = scenario.n_parties();
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    if group_a.first() != Some(&0) || group_a.len() >= n || !group_a.windows(2).all(|w| w[0] < w[1])
    {
        return Err(CoreError::InvalidInput(format!(
            "bipartition group {group_a:?} must be a sorted proper subset containing party 0"
        )));
    }
    let group_b: Vec<usize> = (0..n).filter(|p| !group_a.contains(p)).collect();
    let a = GroupSpace::new(group_a.to_vec(), m, d);
    let b = GroupSpace::new(group_b.clone(), m, d);
    let na = a.strategy_count(cap)?;
    let nb = b.strategy_count(cap)?;
    let total128 = na.checked_mul(nb).ok_or(CoreError::EnumerationTooLarge {
        needed: u128::MAX,
        cap,
    })?;
    if total128 > cap {
        return Err(CoreError::EnumerationTooLarge {
            needed: total128,
            cap,
        });
    }
    let total = total128 as u64;
    let nb = nb as u64;

    // Term settings are fixed, so each term reads one fixed row of each
    // group's table.
    let term_rows: Vec<(usize, usize)> = functional
        .terms()
        .iter()
        .map(|t| {
            let s = t.settings(m);
            (a.joint_setting_index(&s, m), b.joint_setting_index(&s, m))
        })
        .collect();

    let n_chunks = total.div_ceil(CHUNK);
    let best = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut digits_a = decode(start / nb, a.n_joint_settings, a.joint_outcome_base as u64);
            let mut digits_b = decode(start % nb, b.n_joint_settings, b.joint_outcome_base as u64);
            let mut outcomes = vec![0u8; n];
            let mut best: Option<(u64, u64)> = None;
            for counter in start..end {
                let mut weight = 0u64;
                for (term, &(row_a, row_b)) in functional.terms().iter().zip(&term_rows) {
                    let oa = &a.outcome_decode[digits_a[row_a] as usize];
                    let ob = &b.outcome_decode[digits_b[row_b] as usize];
                    for (slot, &p) in a.parties.iter().enumerate() {
                        outcomes[p] = oa[slot];
                    }
                    for (slot, &p) in b.parties.iter().enumerate() {
                        outcomes[p] = ob[slot];
                    }
                    weight += term.outcome_weight(&outcomes, m, d) as u64;
                }
                if best.is_none_or(|(w, _)| weight < w) {
                    best = Some((weight, counter));
                }
                if !increment(&mut digits_b, b.joint_outcome_base) {
                    increment(&mut digits_a, a.joint_outcome_base);
                }
            }
            best
        })
        .reduce(
            || None,
            |x, y| match (x, y) {
                (Some(p), Some(q)) => Some(p.min(q)),
                (p, q) => p.or(q),
            },
        )
        .expect("strategy space is nonempty");

    let (weight_total, counter) = best;
    let digits_a = decode(
        counter / nb,
        a.n_joint_settings,
        a.joint_outcome_base as u64,
    );
    let digits_b = decode(
        counter % nb,
        b.n_joint_settings,
        b.joint_outcome_base as u64,
    );
    Ok(BipartitionMinimum {
        group_a: group_a.to_vec(),
        group_b,
        minimum: weight_total as f64 * functional.regularization(),
        weight_total,
        witness: BilocalWitness {
            group_a: a.witness(&digits_a, m),
            group_b: b.witness(&digits_b, m),
        },
        evaluations: total128,
    })
}

/// Exhaustive minimum over all bipartitions and all deterministic group
/// strategies.  The cap applies to the summed strategy count.
pub fn min_bilocal(functional: &BellFunctional, cap: u128) -> Result<BilocalMinimum> {
    let groups = bipartitions(functional.scenario().n_parties());
    let mut needed = 0u128;
    for group in &groups {
        let group_b: Vec<usize> = (0..functional.scenario().n_parties())
            .filter(|p| !group.contains(p))
            .collect();
        let m = functional.scenario().n_settings();
        let d = functional.scenario().n_outcomes();
        let na = GroupSpace::new(group.clone(), m, d).strategy_count(u128::MAX)?;
        let nb = GroupSpace::new(group_b, m, d).strategy_count(u128::MAX)?;
        needed += na * nb;
    }
    if needed > cap {
        return Err(CoreError::EnumerationTooLarge { needed, cap });
    }

    let per_bipartition: Vec<BipartitionMinimum> = groups
        .iter()
        .map(|g| min_bipartition(functional, g, cap))
        .collect::<Result<_>>()?;
    let witness_bipartition = per_bipartition
        .iter()
        .enumerate()
        .min_by_key(|(i, r)| (r.weight_total, *i))
        .map(|(i, _)| i)
        .expect("at least one bipartition");
    let weight_total = per_bipartition[witness_bipartition].weight_total;
    Ok(BilocalMinimum {
        minimum: per_bipartition[witness_bipartition].minimum,
        weight_total,
        witness_bipartition,
        evaluations: per_bipartition.iter().map(|r| r.evaluations).sum(),
        per_bipartition,
    })
}

/// Side-by-side record of the four model classes' values on one functional.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub scenario: Scenario,
    pub local_minimum: f64,
    pub bilocal_minimum: f64,
    pub quantum_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonsignaling_minimum: Option<f64>,
}

/// Runs both enumerations and records them next to the quantum value, which
/// must lie strictly between 0 and the deterministic bound.
pub fn gap_report(
    functional: &BellFunctional,
    quantum_value: f64,
    nonsignaling_minimum: Option<f64>,
    cap: u128,
) -> Result<GapReport> {
    let bound = functional.bilocal_bound();
    if !(quantum_value > 0.0 && quantum_value < bound) {
        return Err(CoreError::InvalidInput(format!(
            "quantum value {quantum_value} is not strictly between 0 and {bound}"
        )));
    }
    Ok(GapReport {
        scenario: *functional.scenario(),
        local_minimum: min_local(functional, cap)?.minimum,
        bilocal_minimum: min_bilocal(functional, cap)?.minimum,
        quantum_value,
        nonsignaling_minimum,
    })
}
