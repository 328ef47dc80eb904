//! The chained multipartite Svetlichny Bell functional.
//!
//! For a scenario with `N` parties, `M` settings and `d` outcomes the
//! functional is a regularized sum of `2 * M^(N-1)` *terms*.  Each term is an
//! expectation `⟨[W]⟩` of a signed modular combination of outcomes
//! `W = Σ_k sign_k · (r_k + offset_k)  (mod d)`, evaluated at one joint
//! setting tuple, with `⟨[W]⟩ = Σ_{i=1}^{d-1} i · P([W] = i)`.
//!
//! Terms come in pairs indexed by `σ = (σ_1, …, σ_{N-1}) ∈ {1..M}^(N-1)`:
//!
//! * a *forward* term where party 0 uses raw setting `σ_1`, party
//!   `k ∈ {1..N-2}` uses raw setting `σ_k + σ_{k+1} - 1`, the last party uses
//!   `σ_{N-1}`, and the signs alternate `+,-,+,…` starting from `+` at party
//!   0;
//! * a *backward* term with every sign negated and party 0's raw setting
//!   shifted to `σ_1 + 1`.
//!
//! Raw settings may exceed `M`; a raw index `i·M + ω` (with `ω ∈ 1..=M`)
//! denotes the observable at setting `ω` with `i` added to its outcome, so
//! the effective setting is `((raw - 1) mod M) + 1` and the term adds an
//! outcome offset `⌊(raw - 1) / M⌋`.
//!
//! The regularized value is `(1 / M^(N-2)) · Σ_terms ⟨[W]⟩`.  Every model in
//! which some bipartition of the parties is only classically correlated
//! satisfies `value >= d - 1`; the quantum models in [`crate::quantum`] go
//! below that bound for every `M`, `d` and `N`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::behavior::{kahan_sum, BehaviorTable};
use crate::error::{CoreError, Result};
use crate::scenario::{Scenario, SettingTuple};

/// Whether a term is the forward or the backward member of its `σ` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Forward,
    Backward,
}

/// One observable inside a term: a party, a raw (possibly wrapping) setting
/// index and the sign its outcome carries in the modular combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TermVariable {
    pub party: usize,
    /// Raw 1-based setting index; values above `M` wrap with an outcome
    /// offset.
    pub raw_setting: u32,
    /// `+1` or `-1`.
    pub sign: i8,
}

impl TermVariable {
    /// Setting actually measured, `((raw - 1) mod M) + 1`.
    pub fn effective_setting(&self, m: u8) -> u8 {
        ((self.raw_setting - 1) % m as u32) as u8 + 1
    }

    /// Outcome shift induced by index wrapping, `⌊(raw - 1) / M⌋`.
    pub fn outcome_offset(&self, m: u8) -> u32 {
        (self.raw_setting - 1) / m as u32
    }
}

/// One expectation term of the functional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainedTerm {
    pub kind: TermKind,
    /// The `σ` multi-index this term came from; empty for synthetic terms
    /// built directly from a setting tuple.
    pub sigma: Vec<u8>,
    /// One variable per party, in party order.
    pub variables: Vec<TermVariable>,
}

impl ChainedTerm {
    /// Synthetic zero-offset term at explicit settings with the alternating
    /// `+,-,+,…` sign pattern; used for constraint checks at arbitrary
    /// setting tuples.
    pub fn unshifted(settings: &[u8]) -> Self {
        ChainedTerm {
            kind: TermKind::Forward,
            sigma: Vec::new(),
            variables: settings
                .iter()
                .enumerate()
                .map(|(p, &s)| TermVariable {
                    party: p,
                    raw_setting: s as u32,
                    sign: if p % 2 == 0 { 1 } else { -1 },
                })
                .collect(),
        }
    }

    /// Effective joint setting tuple this term is evaluated at.
    pub fn settings(&self, m: u8) -> SettingTuple {
        SettingTuple(
            self.variables
                .iter()
                .map(|v| v.effective_setting(m))
                .collect(),
        )
    }

    /// Outcome offsets per party induced by wrapping.
    pub fn offsets(&self, m: u8) -> Vec<u32> {
        self.variables.iter().map(|v| v.outcome_offset(m)).collect()
    }

    /// The term's modular combination `[Σ_k sign_k (r_k + offset_k)]` as a
    /// value in `0..d`.
    pub fn outcome_weight(&self, outcomes: &[u8], m: u8, d: u8) -> u8 {
        let mut acc: i64 = 0;
        for v in &self.variables {
            acc += v.sign as i64 * (outcomes[v.party] as i64 + v.outcome_offset(m) as i64);
        }
        acc.rem_euclid(d as i64) as u8
    }

    /// The unique outcome for `party` that makes the term's combination
    /// vanish given everyone else's outcomes (the entry of `outcomes` at
    /// `party` is ignored).
    pub fn forced_outcome(&self, party: usize, outcomes: &[u8], m: u8, d: u8) -> u8 {
        let mut acc: i64 = 0;
        let mut own = None;
        for v in &self.variables {
            if v.party == party {
                own = Some(v);
            } else {
                acc += v.sign as i64 * (outcomes[v.party] as i64 + v.outcome_offset(m) as i64);
            }
        }
        let own = own.expect("term has one variable per party");
        (-(own.sign as i64) * acc - own.outcome_offset(m) as i64).rem_euclid(d as i64) as u8
    }
}

/// The chained Svetlichny functional for one scenario.
#[derive(Debug, Clone)]
pub struct BellFunctional {
    scenario: Scenario,
    terms: Vec<ChainedTerm>,
    /// Maps the setting index of each inequality basis to its term index.
    basis_terms: BTreeMap<usize, usize>,
}

impl BellFunctional {
    /// Builds the functional and verifies its structure: term count
    /// `2·M^(N-1)`, pairwise distinct effective setting tuples, and — for
    /// `N = 2` and `N = 3` — exact agreement with an independent literal
    /// transcription of the two- and three-party forms.
    pub fn build(scenario: &Scenario) -> Result<Self> {
        let n = scenario.n_parties();
        let m = scenario.n_settings();
        let mut terms = Vec::with_capacity(2 * (m as usize).pow(n as u32 - 1));

        let mut sigma = vec![1u8; n - 1];
        loop {
            for kind in [TermKind::Forward, TermKind::Backward] {
                let flip: i64 = match kind {
                    TermKind::Forward => 1,
                    TermKind::Backward => -1,
                };
                let mut variables = Vec::with_capacity(n);
                for p in 0..n {
                    let raw = if p == 0 {
                        sigma[0] as u32 + if kind == TermKind::Backward { 1 } else { 0 }
                    } else if p == n - 1 {
                        sigma[n - 2] as u32
                    } else {
                        sigma[p - 1] as u32 + sigma[p] as u32 - 1
                    };
                    let sign = flip * if p % 2 == 0 { 1 } else { -1 };
                    variables.push(TermVariable {
                        party: p,
                        raw_setting: raw,
                        sign: sign as i8,
                    });
                }
                terms.push(ChainedTerm {
                    kind,
                    sigma: sigma.clone(),
                    variables,
                });
            }
            // advance σ lexicographically, last coordinate fastest
            let mut pos = n - 1;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if sigma[pos] < m {
                    sigma[pos] += 1;
                    break;
                }
                sigma[pos] = 1;
            }
            if sigma.iter().all(|&s| s == 1) {
                break;
            }
        }

        let expected = 2 * (m as usize).pow(n as u32 - 1);
        if terms.len() != expected {
            return Err(CoreError::InvalidInput(format!(
                "built {} terms, expected {expected}",
                terms.len()
            )));
        }

        // Terms and inequality bases must be in bijection.
        let mut basis_terms = BTreeMap::new();
        for (idx, term) in terms.iter().enumerate() {
            let si = scenario.setting_index(&term.settings(m))?;
            if basis_terms.insert(si, idx).is_some() {
                return Err(CoreError::InvalidInput(format!(
                    "two terms share the setting tuple {:?}",
                    term.settings(m)
                )));
            }
        }

        let functional = BellFunctional {
            scenario: *scenario,
            terms,
            basis_terms,
        };
        functional.check_against_literal_forms()?;
        Ok(functional)
    }

    /// Cross-checks the generic builder against literal transcriptions of
    /// the two- and three-party functionals written with independent index
    /// bookkeeping.
    fn check_against_literal_forms(&self) -> Result<()> {
        let m = self.scenario.n_settings();
        let literal: Option<Vec<ChainedTerm>> = match self.scenario.n_parties() {
            2 => Some(literal_two_party_terms(m)),
            3 => Some(literal_three_party_terms(m)),
            _ => None,
        };
        if let Some(literal) = literal {
            if literal != self.terms {
                return Err(CoreError::InvalidInput(
                    "generic term builder disagrees with the literal low-N transcription".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn terms(&self) -> &[ChainedTerm] {
        &self.terms
    }

    /// The regularization prefactor `1 / M^(N-2)`.
    pub fn regularization(&self) -> f64 {
        1.0 / (self.scenario.n_settings() as f64).powi(self.scenario.n_parties() as i32 - 2)
    }

    /// Exact rational regularization prefactor.
    pub fn regularization_exact(&self) -> BigRational {
        BigRational::new(
            BigInt::from(1),
            BigInt::from(self.scenario.n_settings() as u64)
                .pow(self.scenario.n_parties() as u32 - 2),
        )
    }

    /// The bound satisfied by every model with a classical bipartition.
    pub fn bilocal_bound(&self) -> f64 {
        self.scenario.n_outcomes() as f64 - 1.0
    }

    /// The setting tuples the functional touches, in setting-index order.
    pub fn inequality_bases(&self) -> Vec<SettingTuple> {
        self.basis_terms
            .keys()
            .map(|&si| self.scenario.setting_tuple(si))
            .collect()
    }

    /// The term evaluated at `settings`, if `settings` is an inequality
    /// basis.
    pub fn term_for_basis(&self, settings: &[u8]) -> Option<&ChainedTerm> {
        let si = self.scenario.setting_index(settings).ok()?;
        self.term_index_for_basis_index(si).map(|i| &self.terms[i])
    }

    /// Term index for a setting index, if it is an inequality basis.
    pub fn term_index_for_basis_index(&self, setting_index: usize) -> Option<usize> {
        self.basis_terms.get(&setting_index).copied()
    }

    /// Expectation `⟨[W]⟩` of one term under a behavior.
    pub fn term_expectation(&self, term: &ChainedTerm, behavior: &BehaviorTable) -> Result<f64> {
        let m = self.scenario.n_settings();
        let d = self.scenario.n_outcomes();
        let settings = term.settings(m);
        let block = behavior.block(&settings)?;
        let sum = kahan_sum(
            self.scenario
                .outcome_tuples()
                .zip(block.iter())
                .map(|(r, &p)| {
                    let w = term.outcome_weight(&r, m, d);
                    w as f64 * p.max(0.0)
                }),
        );
        Ok(sum)
    }

    /// The regularized functional value on a behavior.  Terms are summed in
    /// their construction order `(σ, kind)` with compensated summation, so
    /// the result is reproducible and matches any other summation schedule
    /// to well below 1e-12.
    pub fn evaluate(&self, behavior: &BehaviorTable) -> Result<f64> {
        let mut expectations = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            expectations.push(self.term_expectation(term, behavior)?);
        }
        Ok(self.regularization() * kahan_sum(expectations))
    }

    /// Per-term distribution of the modular combination `[W]` under a
    /// behavior: a vector of length `d`.
    pub fn term_distribution(
        &self,
        term: &ChainedTerm,
        behavior: &BehaviorTable,
    ) -> Result<Vec<f64>> {
        let m = self.scenario.n_settings();
        let d = self.scenario.n_outcomes();
        let settings = term.settings(m);
        let block = behavior.block(&settings)?;
        let mut dist = vec![0.0f64; d as usize];
        for (r, &p) in self.scenario.outcome_tuples().zip(block.iter()) {
            dist[term.outcome_weight(&r, m, d) as usize] += p.max(0.0);
        }
        Ok(dist)
    }
}

/// Absolute change of the functional value when the behavior's parties are
/// relabeled by `perm`.  The chain structure makes the value invariant under
/// exchanging the first and third party and under exchanging the last and
/// third-from-last party; other permutations may or may not preserve it and
/// are merely measured here.
pub fn check_permutation_symmetry(
    functional: &BellFunctional,
    behavior: &BehaviorTable,
    perm: &[usize],
) -> Result<f64> {
    let base = functional.evaluate(behavior)?;
    let permuted = functional.evaluate(&behavior.permute_parties(perm)?)?;
    Ok((base - permuted).abs())
}

/// Literal transcription of the two-party chained functional
/// `Σ_α ⟨[A_α - B_α]⟩ + ⟨[B_α - A_{α+1}]⟩` with `A_{M+1} = [A_1 + 1]`.
fn literal_two_party_terms(m: u8) -> Vec<ChainedTerm> {
    let mut terms = Vec::new();
    for alpha in 1..=m {
        terms.push(ChainedTerm {
            kind: TermKind::Forward,
            sigma: vec![alpha],
            variables: vec![
                TermVariable {
                    party: 0,
                    raw_setting: alpha as u32,
                    sign: 1,
                },
                TermVariable {
                    party: 1,
                    raw_setting: alpha as u32,
                    sign: -1,
                },
            ],
        });
        terms.push(ChainedTerm {
            kind: TermKind::Backward,
            sigma: vec![alpha],
            variables: vec![
                TermVariable {
                    party: 0,
                    raw_setting: alpha as u32 + 1,
                    sign: -1,
                },
                TermVariable {
                    party: 1,
                    raw_setting: alpha as u32,
                    sign: 1,
                },
            ],
        });
    }
    terms
}

/// Literal transcription of the three-party functional
/// `Σ_{α,β} ⟨[A_α - B_{α+β-1} + C_β]⟩ + ⟨[B_{α+β-1} - A_{α+1} - C_β]⟩`.
fn literal_three_party_terms(m: u8) -> Vec<ChainedTerm> {
    let mut terms = Vec::new();
    for alpha in 1..=m {
        for beta in 1..=m {
            let b_raw = alpha as u32 + beta as u32 - 1;
            terms.push(ChainedTerm {
                kind: TermKind::Forward,
                sigma: vec![alpha, beta],
                variables: vec![
                    TermVariable {
                        party: 0,
                        raw_setting: alpha as u32,
                        sign: 1,
                    },
                    TermVariable {
                        party: 1,
                        raw_setting: b_raw,
                        sign: -1,
                    },
                    TermVariable {
                        party: 2,
                        raw_setting: beta as u32,
                        sign: 1,
                    },
                ],
            });
            terms.push(ChainedTerm {
                kind: TermKind::Backward,
                sigma: vec![alpha, beta],
                variables: vec![
                    TermVariable {
                        party: 0,
                        raw_setting: alpha as u32 + 1,
                        sign: -1,
                    },
                    TermVariable {
                        party: 1,
                        raw_setting: b_raw,
                        sign: 1,
                    },
                    TermVariable {
                        party: 2,
                        raw_setting: beta as u32,
                        sign: -1,
                    },
                ],
            });
        }
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sc(n: usize, m: u8, d: u8) -> Scenario {
        Scenario::new(n, m, d).unwrap()
    }

    fn random_table(scenario: &Scenario, seed: u64) -> BehaviorTable {
        // Arbitrary normalized table (not necessarily nonsignaling): the
        // functional is linear, so identities tested on these hold for all
        // behaviors.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_out = scenario.n_outcome_tuples();
        let mut entries = Vec::new();
        for s in scenario.setting_tuples() {
            let raw: Vec<f64> = (0..n_out).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            for (r, w) in scenario.outcome_tuples().zip(raw.iter()) {
                entries.push((s.to_vec(), r.to_vec(), w / total));
            }
        }
        BehaviorTable::from_entries(scenario, &entries, tol::NORMALIZATION).unwrap()
    }

    /// Independent two-party evaluator with if/else wrap handling.
    fn two_party_value_by_hand(b: &BehaviorTable) -> f64 {
        let scenario = b.scenario();
        let m = scenario.n_settings();
        let d = scenario.n_outcomes() as i64;
        let mut total = 0.0;
        for alpha in 1..=m {
            for r in scenario.outcome_tuples() {
                let w = (r[0] as i64 - r[1] as i64).rem_euclid(d);
                total += w as f64 * b.prob(&[alpha, alpha], &r).unwrap();
            }
            let (a_next, a_shift) = if alpha == m { (1, 1) } else { (alpha + 1, 0) };
            for r in scenario.outcome_tuples() {
                let w = (r[1] as i64 - r[0] as i64 - a_shift).rem_euclid(d);
                total += w as f64 * b.prob(&[a_next, alpha], &r).unwrap();
            }
        }
        total
    }

    /// Independent three-party evaluator with if/else wrap handling.
    fn three_party_value_by_hand(b: &BehaviorTable) -> f64 {
        let scenario = b.scenario();
        let m = scenario.n_settings();
        let d = scenario.n_outcomes() as i64;
        let mut total = 0.0;
        for alpha in 1..=m {
            for beta in 1..=m {
                let raw_b = alpha + beta - 1;
                let (b_set, b_shift) = if raw_b > m {
                    (raw_b - m, 1)
                } else {
                    (raw_b, 0)
                };
                for r in scenario.outcome_tuples() {
                    let w = (r[0] as i64 - (r[1] as i64 + b_shift) + r[2] as i64).rem_euclid(d);
                    total += w as f64 * b.prob(&[alpha, b_set, beta], &r).unwrap();
                }
                let (a_set, a_shift) = if alpha == m { (1, 1) } else { (alpha + 1, 0) };
                for r in scenario.outcome_tuples() {
                    let w = ((r[1] as i64 + b_shift) - (r[0] as i64 + a_shift) - r[2] as i64)
                        .rem_euclid(d);
                    total += w as f64 * b.prob(&[a_set, b_set, beta], &r).unwrap();
                }
            }
        }
        total / m as f64
    }

    #[test]
    fn two_party_two_setting_term_table() {
        let f = BellFunctional::build(&sc(2, 2, 2)).unwrap();
        assert_eq!(f.terms().len(), 4);
        assert_eq!(f.regularization(), 1.0);
        let effective: Vec<Vec<u8>> = f.terms().iter().map(|t| t.settings(2).to_vec()).collect();
        assert_eq!(
            effective,
            vec![vec![1, 1], vec![2, 1], vec![2, 2], vec![1, 2]]
        );
        // The last backward term wraps: raw setting 3 -> setting 1, offset 1.
        let wrap = &f.terms()[3];
        assert_eq!(wrap.kind, TermKind::Backward);
        assert_eq!(wrap.variables[0].raw_setting, 3);
        assert_eq!(wrap.variables[0].outcome_offset(2), 1);
        assert_eq!(wrap.variables[0].sign, -1);
        assert_eq!(wrap.variables[1].sign, 1);
    }

    #[test]
    fn term_count_and_regularization() {
        let f = BellFunctional::build(&sc(3, 2, 2)).unwrap();
        assert_eq!(f.terms().len(), 8);
        assert!((f.regularization() - 0.5).abs() < 1e-15);
        let f = BellFunctional::build(&sc(4, 3, 3)).unwrap();
        assert_eq!(f.terms().len(), 54);
        assert!((f.regularization() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn bases_are_distinct_and_counted() {
        for (n, m, d) in [
            (2, 2, 2),
            (2, 5, 3),
            (3, 2, 2),
            (3, 4, 2),
            (4, 2, 3),
            (4, 3, 2),
        ] {
            let f = BellFunctional::build(&sc(n, m, d)).unwrap();
            let bases = f.inequality_bases();
            assert_eq!(bases.len(), 2 * (m as usize).pow(n as u32 - 1));
            // With two settings, the bases exhaust the grid.
            if m == 2 {
                assert_eq!(bases.len(), f.scenario().n_setting_tuples());
            }
            for basis in &bases {
                assert!(f.term_for_basis(basis).is_some());
            }
        }
    }

    #[test]
    fn uniform_behavior_value_is_m_times_d_minus_1() {
        for (n, m, d) in [(2, 2, 2), (2, 3, 2), (3, 2, 2), (3, 2, 3), (4, 2, 2)] {
            let scenario = sc(n, m, d);
            let f = BellFunctional::build(&scenario).unwrap();
            let value = f.evaluate(&BehaviorTable::uniform(&scenario)).unwrap();
            let expected = m as f64 * (d as f64 - 1.0);
            assert!(
                (value - expected).abs() < 1e-10,
                "({n},{m},{d}): {value} vs {expected}"
            );
        }
    }

    #[test]
    fn all_zero_outcomes_reach_the_bilocal_bound_at_three_parties() {
        let scenario = sc(3, 2, 2);
        let f = BellFunctional::build(&scenario).unwrap();
        let zeros =
            BehaviorTable::from_local_assignment(&scenario, &[vec![0, 0], vec![0, 0], vec![0, 0]])
                .unwrap();
        let value = f.evaluate(&zeros).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
        assert!((value - f.bilocal_bound()).abs() < 1e-12);
    }

    #[test]
    fn term_weight_and_expectation_basics() {
        let scenario = sc(2, 2, 3);
        let f = BellFunctional::build(&scenario).unwrap();
        let uniform = BehaviorTable::uniform(&scenario);
        for term in f.terms() {
            let e = f.term_expectation(term, &uniform).unwrap();
            assert!((e - 1.0).abs() < 1e-12, "uniform expectation is (d-1)/2");
        }
        // Forward term without wraps on all-zero outcomes: weight 0.
        let forward = &f.terms()[0];
        assert_eq!(forward.outcome_weight(&[0, 0], 2, 3), 0);
        // A wrapped variable with sign -1 on all-zero outcomes gives d-1.
        let wrapped = &f.terms()[3];
        assert_eq!(wrapped.variables[0].outcome_offset(2), 1);
        assert_eq!(wrapped.outcome_weight(&[0, 0], 2, 3), 2);
    }

    #[test]
    fn generic_builder_matches_hand_written_evaluators() {
        let scenario = sc(2, 4, 3);
        let f = BellFunctional::build(&scenario).unwrap();
        for seed in 0..20 {
            let b = random_table(&scenario, seed);
            let fast = f.evaluate(&b).unwrap();
            let slow = two_party_value_by_hand(&b);
            assert!((fast - slow).abs() < tol::IDENTITY, "{fast} vs {slow}");
        }
        let scenario = sc(3, 3, 3);
        let f = BellFunctional::build(&scenario).unwrap();
        for seed in 0..20 {
            let b = random_table(&scenario, seed);
            let fast = f.evaluate(&b).unwrap();
            let slow = three_party_value_by_hand(&b);
            assert!((fast - slow).abs() < tol::IDENTITY, "{fast} vs {slow}");
        }
    }

    #[test]
    fn value_does_not_depend_on_summation_schedule() {
        let scenario = sc(3, 4, 2);
        let f = BellFunctional::build(&scenario).unwrap();
        let b = random_table(&scenario, 7);
        let forward = f.evaluate(&b).unwrap();
        // Reverse order and pairwise-chunked accumulation must agree.
        let mut expectations: Vec<f64> = f
            .terms()
            .iter()
            .map(|t| f.term_expectation(t, &b).unwrap())
            .collect();
        expectations.reverse();
        let reversed = f.regularization() * kahan_sum(expectations.iter().copied());
        assert!((forward - reversed).abs() < tol::IDENTITY);
        let chunked: f64 = f.regularization()
            * expectations
                .chunks(5)
                .map(|c| kahan_sum(c.iter().copied()))
                .sum::<f64>();
        assert!((forward - chunked).abs() < tol::IDENTITY);
    }

    #[test]
    fn first_and_third_party_exchange_preserves_the_value() {
        for m in [2u8, 3] {
            let scenario = sc(3, m, 3);
            let f = BellFunctional::build(&scenario).unwrap();
            for seed in 0..10 {
                let b = random_table(&scenario, 100 + seed);
                let delta = check_permutation_symmetry(&f, &b, &[2, 1, 0]).unwrap();
                assert!(delta < tol::IDENTITY, "m={m} seed={seed}: delta {delta}");
            }
        }
    }

    #[test]
    fn last_and_third_from_last_exchange_preserves_the_value() {
        let scenario = sc(4, 2, 2);
        let f = BellFunctional::build(&scenario).unwrap();
        for seed in 0..10 {
            let b = random_table(&scenario, 200 + seed);
            let delta = check_permutation_symmetry(&f, &b, &[0, 3, 2, 1]).unwrap();
            assert!(delta < tol::IDENTITY, "seed={seed}: delta {delta}");
        }
    }

    #[test]
    fn forced_outcome_zeroes_the_weight() {
        let scenario = sc(3, 3, 5);
        let f = BellFunctional::build(&scenario).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let term = &f.terms()[rng.random_range(0..f.terms().len())];
            let party = rng.random_range(0..3);
            let mut outcomes: Vec<u8> = (0..3).map(|_| rng.random_range(0..5)).collect();
            outcomes[party] = term.forced_outcome(party, &outcomes, 3, 5);
            assert_eq!(term.outcome_weight(&outcomes, 3, 5), 0);
        }
    }

    #[test]
    fn unshifted_term_weight_is_plain_alternating_sum() {
        let term = ChainedTerm::unshifted(&[2, 1, 3]);
        assert_eq!(
            term.outcome_weight(&[1, 2, 0], 3, 4),
            (1 - 2 + 0i64).rem_euclid(4) as u8
        );
        assert_eq!(term.offsets(3), vec![0, 0, 0]);
        assert_eq!(term.settings(3).as_slice(), &[2, 1, 3]);
    }
}
