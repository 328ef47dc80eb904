//! Conditional probability tables `P(outcomes | settings)`.
//!
//! A [`BehaviorTable`] is immutable after construction and stores one
//! normalized outcome distribution per *supported* setting tuple.  Support is
//! either the full `M^N` grid (dense, row-major) or a sparse ordered subset
//! of setting tuples; operations that require the full grid say so and fail
//! with a typed error on sparse tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scenario::{Scenario, SettingTuple};
use crate::tol;

/// Compensated (Kahan) summation; used wherever many small probabilities are
/// accumulated so results do not depend on accumulation noise.
pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[derive(Debug, Clone, PartialEq)]
enum SupportMap {
    /// Every setting tuple is supported; block index equals setting index.
    Full,
    /// Maps supported setting indices to block indices.
    Sparse(BTreeMap<usize, usize>),
}

/// Immutable table of joint conditional probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorTable {
    scenario: Scenario,
    support: SupportMap,
    /// Concatenated outcome distributions, one block of `d^N` entries per
    /// supported setting tuple, in setting-index order.
    blocks: Vec<f64>,
}

/// One violation found by the nonsignaling check.
#[derive(Debug, Clone, Serialize)]
pub struct NonsignalingViolation {
    /// The party whose setting choice influences the others' marginal.
    pub party: usize,
    /// Full setting tuple used as the comparison baseline.
    pub baseline_settings: Vec<u8>,
    /// Full setting tuple (differing only at `party`) where the marginal
    /// deviates.
    pub compared_settings: Vec<u8>,
    /// Joint outcomes of the other parties at which the deviation occurs.
    pub other_outcomes: Vec<u8>,
    pub deviation: f64,
}

/// Result of a nonsignaling check.
#[derive(Debug, Clone, Serialize)]
pub struct NonsignalingReport {
    /// Largest absolute marginal deviation found (0 for a clean table).
    pub max_deviation: f64,
    /// Details of the worst deviation if any deviation exceeded the
    /// tolerance.
    pub worst: Option<NonsignalingViolation>,
}

impl NonsignalingReport {
    pub fn passes(&self) -> bool {
        self.worst.is_none()
    }
}

#[derive(Serialize, Deserialize)]
struct EntryForm {
    settings: Vec<u8>,
    outcomes: Vec<u8>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct BehaviorForm {
    scenario: Scenario,
    entries: Vec<EntryForm>,
}

impl BehaviorTable {
    /// Builds a full-grid table from a probability function.
    pub fn from_fn_full<F>(scenario: &Scenario, mut prob: F, tolerance: f64) -> Result<Self>
    where
        F: FnMut(&[u8], &[u8]) -> f64,
    {
        let n_out = scenario.n_outcome_tuples();
        let mut blocks = Vec::with_capacity(scenario.n_cells());
        for s in scenario.setting_tuples() {
            for r in scenario.outcome_tuples() {
                blocks.push(prob(&s, &r));
            }
        }
        let table = BehaviorTable {
            scenario: *scenario,
            support: SupportMap::Full,
            blocks,
        };
        table.validate(n_out, tolerance)?;
        Ok(table)
    }

    /// Builds a table from explicit entries; omitted outcomes are zero.
    /// Support is the set of setting tuples that appear; if that covers the
    /// whole grid the table is stored densely.
    pub fn from_entries(
        scenario: &Scenario,
        entries: &[(Vec<u8>, Vec<u8>, f64)],
        tolerance: f64,
    ) -> Result<Self> {
        let n_out = scenario.n_outcome_tuples();
        let mut per_setting: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (s, r, p) in entries {
            let si = scenario.setting_index(s)?;
            let oi = scenario.outcome_index(r)?;
            let block = per_setting.entry(si).or_insert_with(|| vec![0.0; n_out]);
            block[oi] += p;
        }
        if per_setting.is_empty() {
            return Err(CoreError::InvalidInput(
                "behavior needs at least one entry".into(),
            ));
        }
        let full = per_setting.len() == scenario.n_setting_tuples();
        let mut blocks = Vec::with_capacity(per_setting.len() * n_out);
        let mut map = BTreeMap::new();
        for (slot, (si, block)) in per_setting.into_iter().enumerate() {
            map.insert(si, slot);
            blocks.extend(block);
        }
        let table = BehaviorTable {
            scenario: *scenario,
            support: if full {
                SupportMap::Full
            } else {
                SupportMap::Sparse(map)
            },
            blocks,
        };
        table.validate(n_out, tolerance)?;
        Ok(table)
    }

    /// Full-grid table with every outcome distribution uniform.
    pub fn uniform(scenario: &Scenario) -> Self {
        let p = 1.0 / scenario.n_outcome_tuples() as f64;
        Self::from_fn_full(scenario, |_, _| p, tol::NORMALIZATION)
            .expect("uniform table is always valid")
    }

    /// Full-grid deterministic table: party `p` on setting `s` outputs
    /// `assign[p][s - 1]`.
    pub fn from_local_assignment(scenario: &Scenario, assign: &[Vec<u8>]) -> Result<Self> {
        if assign.len() != scenario.n_parties()
            || assign
                .iter()
                .any(|a| a.len() != scenario.n_settings() as usize)
        {
            return Err(CoreError::InvalidInput(
                "assignment must give one outcome per party per setting".into(),
            ));
        }
        if assign.iter().flatten().any(|&r| r >= scenario.n_outcomes()) {
            return Err(CoreError::InvalidInput(
                "assignment contains an out-of-range outcome".into(),
            ));
        }
        Self::from_fn_full(
            scenario,
            |s, r| {
                let hit = s
                    .iter()
                    .zip(r.iter())
                    .zip(assign.iter())
                    .all(|((&sp, &rp), a)| a[sp as usize - 1] == rp);
                if hit {
                    1.0
                } else {
                    0.0
                }
            },
            tol::NORMALIZATION,
        )
    }

    fn validate(&self, n_out: usize, tolerance: f64) -> Result<()> {
        for (si, slot) in self.slots() {
            let block = &self.blocks[slot * n_out..(slot + 1) * n_out];
            for &p in block {
                if !p.is_finite() || p < -tolerance || p > 1.0 + tolerance {
                    return Err(CoreError::InvalidEntry {
                        settings: self.scenario.setting_tuple(si).to_vec(),
                        value: p,
                    });
                }
            }
            let sum = kahan_sum(block.iter().copied());
            if (sum - 1.0).abs() > tolerance {
                return Err(CoreError::NotNormalized {
                    settings: self.scenario.setting_tuple(si).to_vec(),
                    sum,
                });
            }
        }
        Ok(())
    }

    /// Iterates `(setting_index, block_slot)` pairs in setting order.
    fn slots(&self) -> Box<dyn Iterator<Item = (usize, usize)> + '_> {
        match &self.support {
            SupportMap::Full => Box::new((0..self.scenario.n_setting_tuples()).map(|i| (i, i))),
            SupportMap::Sparse(map) => Box::new(map.iter().map(|(&si, &slot)| (si, slot))),
        }
    }

    fn slot_of(&self, setting_index: usize) -> Option<usize> {
        match &self.support {
            SupportMap::Full => Some(setting_index),
            SupportMap::Sparse(map) => map.get(&setting_index).copied(),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn is_full_grid(&self) -> bool {
        matches!(self.support, SupportMap::Full)
    }

    pub fn n_supported_settings(&self) -> usize {
        match &self.support {
            SupportMap::Full => self.scenario.n_setting_tuples(),
            SupportMap::Sparse(map) => map.len(),
        }
    }

    /// Supported setting tuples in index order.
    pub fn supported_settings(&self) -> Vec<SettingTuple> {
        self.slots()
            .map(|(si, _)| self.scenario.setting_tuple(si))
            .collect()
    }

    pub fn supports(&self, settings: &[u8]) -> bool {
        self.scenario
            .setting_index(settings)
            .ok()
            .and_then(|si| self.slot_of(si))
            .is_some()
    }

    /// The outcome distribution for one supported setting tuple, in outcome
    /// index order.  Entries may carry `-tolerance` dust; use
    /// [`BehaviorTable::prob`] for clamped reads.
    pub fn block(&self, settings: &[u8]) -> Result<&[f64]> {
        let si = self.scenario.setting_index(settings)?;
        let slot = self
            .slot_of(si)
            .ok_or_else(|| CoreError::UnsupportedSetting {
                settings: settings.to_vec(),
            })?;
        let n_out = self.scenario.n_outcome_tuples();
        Ok(&self.blocks[slot * n_out..(slot + 1) * n_out])
    }

    /// Single probability, clamped to 0 from below.
    pub fn prob(&self, settings: &[u8], outcomes: &[u8]) -> Result<f64> {
        let block = self.block(settings)?;
        let oi = self.scenario.outcome_index(outcomes)?;
        Ok(block[oi].max(0.0))
    }

    /// Marginal distribution of the parties in `keep` (strictly increasing)
    /// given the full setting tuple `settings`.  The result is indexed
    /// lexicographically by the kept parties' outcomes; an empty `keep`
    /// yields the single total probability.
    pub fn marginalize(&self, keep: &[usize], settings: &[u8]) -> Result<Vec<f64>> {
        let n = self.scenario.n_parties();
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&p| p >= n) {
            return Err(CoreError::InvalidInput(format!(
                "keep set {keep:?} must be strictly increasing within 0..{n}"
            )));
        }
        let block = self.block(settings)?;
        let d = self.scenario.n_outcomes() as usize;
        let out_len = d.pow(keep.len() as u32);
        let mut acc = vec![0.0f64; out_len];
        let mut tuple = vec![0u8; n];
        for (oi, p) in block.iter().enumerate() {
            // Decode the outcome tuple once per entry.
            let mut rest = oi;
            for p_idx in (0..n).rev() {
                tuple[p_idx] = (rest % d) as u8;
                rest /= d;
            }
            let mut sub = 0usize;
            for &k in keep {
                sub = sub * d + tuple[k] as usize;
            }
            acc[sub] += p.max(0.0);
        }
        Ok(acc)
    }

    /// Checks that no party's setting choice is visible in the other
    /// parties' joint marginal.  Requires full-grid support.
    pub fn check_nonsignaling(&self, tolerance: f64) -> Result<NonsignalingReport> {
        if !self.is_full_grid() {
            return Err(CoreError::SparseUnsupported {
                operation: "check_nonsignaling",
            });
        }
        self.check_nonsignaling_on_support(tolerance)
    }

    /// Nonsignaling check restricted to the supported setting family: for
    /// each party, supported tuples that agree on everyone else's settings
    /// must induce the same marginal on everyone else's outcomes.
    pub fn check_nonsignaling_on_support(&self, tolerance: f64) -> Result<NonsignalingReport> {
        let n = self.scenario.n_parties();
        let d = self.scenario.n_outcomes() as usize;
        let n_out = self.scenario.n_outcome_tuples();
        let rest_len = n_out / d;
        let mut max_dev = 0.0f64;
        let mut worst: Option<NonsignalingViolation> = None;

        for party in 0..n {
            // Stride of this party's digit in the outcome index; dropping the
            // digit maps an outcome index to the other parties' joint index.
            let stride = d.pow((n - 1 - party) as u32);
            // Group supported settings by the other parties' settings.
            let mut groups: BTreeMap<Vec<u8>, Vec<(usize, usize)>> = BTreeMap::new();
            for (si, slot) in self.slots() {
                let mut others = self.scenario.setting_tuple(si).to_vec();
                others.remove(party);
                groups.entry(others).or_default().push((si, slot));
            }
            for members in groups.values() {
                if members.len() < 2 {
                    continue;
                }
                let marginal = |slot: usize| -> Vec<f64> {
                    let block = &self.blocks[slot * n_out..(slot + 1) * n_out];
                    let mut m = vec![0.0f64; rest_len];
                    for (oi, p) in block.iter().enumerate() {
                        let hi = oi / (stride * d);
                        let lo = oi % stride;
                        m[hi * stride + lo] += p.max(0.0);
                    }
                    m
                };
                let (base_si, base_slot) = members[0];
                let base = marginal(base_slot);
                for &(si, slot) in &members[1..] {
                    let m = marginal(slot);
                    for (rest_idx, (a, b)) in base.iter().zip(m.iter()).enumerate() {
                        let dev = (a - b).abs();
                        if dev > max_dev {
                            max_dev = dev;
                            if dev > tolerance {
                                let mut other_outcomes = vec![0u8; n - 1];
                                let mut rest = rest_idx;
                                for j in (0..n - 1).rev() {
                                    other_outcomes[j] = (rest % d) as u8;
                                    rest /= d;
                                }
                                worst = Some(NonsignalingViolation {
                                    party,
                                    baseline_settings: self
                                        .scenario
                                        .setting_tuple(base_si)
                                        .to_vec(),
                                    compared_settings: self.scenario.setting_tuple(si).to_vec(),
                                    other_outcomes,
                                    deviation: dev,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(NonsignalingReport {
            max_deviation: max_dev,
            worst,
        })
    }

    /// Relabels parties: the result's party `i` is the original party
    /// `perm[i]`.  Requires full-grid support.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<BehaviorTable> {
        self.scenario.check_permutation(perm)?;
        if !self.is_full_grid() {
            return Err(CoreError::SparseUnsupported {
                operation: "permute_parties",
            });
        }
        let n = self.scenario.n_parties();
        let n_out = self.scenario.n_outcome_tuples();
        let mut blocks = vec![0.0f64; self.blocks.len()];
        let mut old_s = vec![0u8; n];
        let mut old_r = vec![0u8; n];
        for (new_si, s) in self.scenario.setting_tuples().enumerate() {
            for (i, &p) in perm.iter().enumerate() {
                old_s[p] = s[i];
            }
            let old_si = self.scenario.setting_index(&old_s)?;
            let old_block = &self.blocks[old_si * n_out..(old_si + 1) * n_out];
            let new_block_start = new_si * n_out;
            for (new_oi, r) in self.scenario.outcome_tuples().enumerate() {
                for (i, &p) in perm.iter().enumerate() {
                    old_r[p] = r[i];
                }
                let old_oi = self.scenario.outcome_index(&old_r)?;
                blocks[new_block_start + new_oi] = old_block[old_oi];
            }
        }
        Ok(BehaviorTable {
            scenario: self.scenario,
            support: SupportMap::Full,
            blocks,
        })
    }

    /// Serializes to the interchange JSON format; zero entries are omitted.
    pub fn to_json(&self) -> Result<String> {
        let n_out = self.scenario.n_outcome_tuples();
        let mut entries = Vec::new();
        for (si, slot) in self.slots() {
            let s = self.scenario.setting_tuple(si).to_vec();
            let block = &self.blocks[slot * n_out..(slot + 1) * n_out];
            for (oi, &p) in block.iter().enumerate() {
                let p = p.max(0.0);
                if p > 0.0 {
                    entries.push(EntryForm {
                        settings: s.clone(),
                        outcomes: self.scenario.outcome_tuple(oi).to_vec(),
                        p,
                    });
                }
            }
        }
        Ok(serde_json::to_string_pretty(&BehaviorForm {
            scenario: self.scenario,
            entries,
        })?)
    }

    /// Parses the interchange JSON format produced by
    /// [`BehaviorTable::to_json`].
    pub fn from_json(text: &str, tolerance: f64) -> Result<Self> {
        let form: BehaviorForm = serde_json::from_str(text)?;
        let entries: Vec<(Vec<u8>, Vec<u8>, f64)> = form
            .entries
            .into_iter()
            .map(|e| (e.settings, e.outcomes, e.p))
            .collect();
        Self::from_entries(&form.scenario, &entries, tolerance)
    }

    /// Convex mixture of tables over identical scenarios and supports.
    pub fn mix(parts: &[(f64, &BehaviorTable)], tolerance: f64) -> Result<BehaviorTable> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| CoreError::InvalidInput("mixture needs at least one part".into()))?;
        let weight_sum: f64 = parts.iter().map(|(w, _)| *w).sum();
        if (weight_sum - 1.0).abs() > tol::NORMALIZATION || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(CoreError::InvalidInput(
                "mixture weights must be nonnegative and sum to 1".into(),
            ));
        }
        let mut blocks = vec![0.0f64; first.blocks.len()];
        for (w, t) in parts {
            if t.scenario != first.scenario || t.support != first.support {
                return Err(CoreError::InvalidInput(
                    "mixture parts must share scenario and support".into(),
                ));
            }
            for (acc, &p) in blocks.iter_mut().zip(&t.blocks) {
                *acc += w * p.max(0.0);
            }
        }
        let table = BehaviorTable {
            scenario: first.scenario,
            support: first.support.clone(),
            blocks,
        };
        table.validate(first.scenario.n_outcome_tuples(), tolerance)?;
        Ok(table)
    }
}

/// Convenience: marginal of a single party as a `Vec` of length `d`.
pub fn single_party_marginal(
    table: &BehaviorTable,
    party: usize,
    settings: &[u8],
) -> Result<Vec<f64>> {
    table.marginalize(&[party], settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(n: usize, m: u8, d: u8) -> Scenario {
        Scenario::new(n, m, d).unwrap()
    }

    #[test]
    fn uniform_marginals_are_uniform() {
        let table = BehaviorTable::uniform(&sc(3, 2, 2));
        let m = table.marginalize(&[0, 2], &[1, 2, 1]).unwrap();
        for p in m {
            assert!((p - 0.25).abs() < 1e-15);
        }
        let total = table.marginalize(&[], &[2, 2, 2]).unwrap();
        assert_eq!(total.len(), 1);
        assert!((total[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_is_exactly_nonsignaling() {
        let table = BehaviorTable::uniform(&sc(2, 3, 2));
        let report = table.check_nonsignaling(tol::NONSIGNALING).unwrap();
        assert_eq!(report.max_deviation, 0.0);
        assert!(report.passes());
    }

    #[test]
    fn deterministic_point_marginalizes_to_point() {
        let scenario = sc(2, 2, 3);
        let table =
            BehaviorTable::from_local_assignment(&scenario, &[vec![2, 0], vec![1, 1]]).unwrap();
        assert_eq!(table.prob(&[1, 1], &[2, 1]).unwrap(), 1.0);
        assert_eq!(table.prob(&[1, 1], &[0, 0]).unwrap(), 0.0);
        let m = table.marginalize(&[1], &[2, 2]).unwrap();
        assert_eq!(m, vec![0.0, 1.0, 0.0]);
        // Local deterministic tables never signal.
        let report = table.check_nonsignaling(tol::NONSIGNALING).unwrap();
        assert!(report.passes());
    }

    #[test]
    fn signaling_table_is_flagged_against_the_influencing_party() {
        let scenario = sc(2, 2, 2);
        // Party 1's outcome copies party 0's setting: blatant signaling.
        let table = BehaviorTable::from_fn_full(
            &scenario,
            |s, r| {
                let want = s[0] - 1;
                if r[1] == want && r[0] == 0 {
                    1.0
                } else {
                    0.0
                }
            },
            tol::NORMALIZATION,
        )
        .unwrap();
        let report = table.check_nonsignaling(tol::NONSIGNALING).unwrap();
        assert!((report.max_deviation - 1.0).abs() < 1e-15);
        let worst = report.worst.expect("violation should be reported");
        assert_eq!(worst.party, 0);
    }

    #[test]
    fn construction_rejects_bad_blocks() {
        let scenario = sc(2, 2, 2);
        assert!(matches!(
            BehaviorTable::from_fn_full(&scenario, |_, _| 0.3, tol::NORMALIZATION),
            Err(CoreError::NotNormalized { .. })
        ));
        assert!(matches!(
            BehaviorTable::from_fn_full(&scenario, |_, _| f64::NAN, tol::NORMALIZATION),
            Err(CoreError::InvalidEntry { .. })
        ));
        let neg = BehaviorTable::from_fn_full(
            &scenario,
            |_, r| if r == [0, 0] { 1.5 } else { -0.5 / 3.0 },
            tol::NORMALIZATION,
        );
        assert!(matches!(neg, Err(CoreError::InvalidEntry { .. })));
    }

    #[test]
    fn lp_dust_is_clamped_on_read() {
        let scenario = sc(2, 2, 2);
        let dust = -0.25e-9;
        let table = BehaviorTable::from_fn_full(
            &scenario,
            |_, r| if r == [0, 0] { 1.0 - 3.0 * dust } else { dust },
            tol::NORMALIZATION,
        )
        .unwrap();
        assert_eq!(table.prob(&[1, 1], &[0, 1]).unwrap(), 0.0);
        assert!(table.marginalize(&[0], &[1, 1]).unwrap()[1] >= 0.0);
    }

    #[test]
    fn sparse_support_errors_are_typed() {
        let scenario = sc(2, 2, 2);
        let entries = vec![(vec![1, 1], vec![0, 0], 0.5), (vec![1, 1], vec![1, 1], 0.5)];
        let table = BehaviorTable::from_entries(&scenario, &entries, tol::NORMALIZATION).unwrap();
        assert!(!table.is_full_grid());
        assert!(matches!(
            table.check_nonsignaling(tol::NONSIGNALING),
            Err(CoreError::SparseUnsupported { .. })
        ));
        assert!(matches!(
            table.permute_parties(&[1, 0]),
            Err(CoreError::SparseUnsupported { .. })
        ));
        assert!(matches!(
            table.prob(&[1, 2], &[0, 0]),
            Err(CoreError::UnsupportedSetting { .. })
        ));
    }

    #[test]
    fn permutation_identity_and_involution() {
        let scenario = sc(3, 2, 2);
        let table = BehaviorTable::from_fn_full(
            &scenario,
            |s, r| {
                // arbitrary but normalized: a setting-dependent biased product
                let bias = 0.1 + 0.8 * ((s[0] + s[1] + s[2]) % 2) as f64;
                r.iter()
                    .map(|&x| {
                        if x == 0 {
                            bias / 2.0 + 0.25
                        } else {
                            0.75 - bias / 2.0
                        }
                    })
                    .product()
            },
            tol::NORMALIZATION,
        )
        .unwrap();
        let id = table.permute_parties(&[0, 1, 2]).unwrap();
        assert_eq!(id, table);
        let swapped = table.permute_parties(&[2, 1, 0]).unwrap();
        let back = swapped.permute_parties(&[2, 1, 0]).unwrap();
        assert_eq!(back, table);
        assert!(
            (swapped.prob(&[1, 2, 2], &[1, 0, 0]).unwrap()
                - table.prob(&[2, 2, 1], &[0, 0, 1]).unwrap())
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn json_round_trip_is_exact_and_omits_zeros() {
        let scenario = sc(2, 2, 2);
        let table = BehaviorTable::from_fn_full(
            &scenario,
            |s, r| {
                if (r[0] + r[1]) % 2 == (s[0] + s[1]) % 2 {
                    1.0 / 3.0
                } else if r[0] == 0 {
                    1.0 / 3.0
                } else {
                    0.0
                }
            },
            tol::NORMALIZATION,
        )
        .unwrap();
        let json = table.to_json().unwrap();
        assert!(!json.contains("\"p\": 0.0"));
        let back = BehaviorTable::from_json(&json, tol::NORMALIZATION).unwrap();
        assert_eq!(back.scenario(), table.scenario());
        for s in scenario.setting_tuples() {
            for r in scenario.outcome_tuples() {
                let a = table.prob(&s, &r).unwrap();
                let b = back.prob(&s, &r).unwrap();
                assert!((a - b).abs() <= tol::SERIALIZATION);
            }
        }
    }

    #[test]
    fn mixtures_stay_normalized() {
        let scenario = sc(2, 2, 2);
        let a = BehaviorTable::uniform(&scenario);
        let b = BehaviorTable::from_local_assignment(&scenario, &[vec![0, 1], vec![1, 0]]).unwrap();
        let mixed = BehaviorTable::mix(&[(0.25, &a), (0.75, &b)], tol::NORMALIZATION).unwrap();
        let p = mixed.prob(&[1, 1], &[0, 1]).unwrap();
        assert!((p - (0.25 * 0.25 + 0.75)).abs() < 1e-12);
        assert!(mixed
            .check_nonsignaling(tol::NONSIGNALING)
            .unwrap()
            .passes());
    }
}
