//! Experiment geometry: party count, settings per party, outcomes per party.

use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{CoreError, Result};
use crate::tol;

/// A correlation scenario: `N` parties, `M` settings each, `d` outcomes each.
///
/// Construction validates `N >= 2`, `M >= 2`, `d >= 2` and that the dense
/// table size `M^N * d^N` stays below a configurable cell cap, so every
/// downstream index computation fits in a `usize` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioForm", into = "ScenarioForm")]
pub struct Scenario {
    n_parties: usize,
    n_settings: u8,
    n_outcomes: u8,
}

/// Wire form of [`Scenario`]: `{"n": .., "m": .., "d": ..}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ScenarioForm {
    n: usize,
    m: u8,
    d: u8,
}

impl TryFrom<ScenarioForm> for Scenario {
    type Error = CoreError;
    fn try_from(f: ScenarioForm) -> Result<Self> {
        Scenario::new(f.n, f.m, f.d)
    }
}

impl From<Scenario> for ScenarioForm {
    fn from(s: Scenario) -> Self {
        ScenarioForm {
            n: s.n_parties,
            m: s.n_settings,
            d: s.n_outcomes,
        }
    }
}

impl Scenario {
    /// Builds a scenario with the default cell cap.
    pub fn new(n_parties: usize, n_settings: u8, n_outcomes: u8) -> Result<Self> {
        Self::with_cell_cap(n_parties, n_settings, n_outcomes, tol::DEFAULT_CELL_CAP)
    }

    /// Builds a scenario, bounding the dense table size by `cell_cap`.
    pub fn with_cell_cap(
        n_parties: usize,
        n_settings: u8,
        n_outcomes: u8,
        cell_cap: u128,
    ) -> Result<Self> {
        if n_parties < 2 {
            return Err(CoreError::InvalidScenario(format!(
                "need at least 2 parties, got {n_parties}"
            )));
        }
        if n_settings < 2 {
            return Err(CoreError::InvalidScenario(format!(
                "need at least 2 settings per party, got {n_settings}"
            )));
        }
        if n_outcomes < 2 {
            return Err(CoreError::InvalidScenario(format!(
                "need at least 2 outcomes per party, got {n_outcomes}"
            )));
        }
        let cells = (n_settings as u128 * n_outcomes as u128)
            .checked_pow(u32::try_from(n_parties).map_err(|_| {
                CoreError::InvalidScenario(format!("party count {n_parties} too large"))
            })?)
            .ok_or(CoreError::TableTooLarge {
                needed: u128::MAX,
                cap: cell_cap,
            })?;
        if cells > cell_cap {
            return Err(CoreError::TableTooLarge {
                needed: cells,
                cap: cell_cap,
            });
        }
        Ok(Scenario {
            n_parties,
            n_settings,
            n_outcomes,
        })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn n_settings(&self) -> u8 {
        self.n_settings
    }

    pub fn n_outcomes(&self) -> u8 {
        self.n_outcomes
    }

    /// Number of joint setting tuples, `M^N`.
    pub fn n_setting_tuples(&self) -> usize {
        (self.n_settings as usize).pow(self.n_parties as u32)
    }

    /// Number of joint outcome tuples, `d^N`.
    pub fn n_outcome_tuples(&self) -> usize {
        (self.n_outcomes as usize).pow(self.n_parties as u32)
    }

    /// Dense table size, `M^N * d^N`.
    pub fn n_cells(&self) -> usize {
        self.n_setting_tuples() * self.n_outcome_tuples()
    }

    /// Lexicographic index of a joint setting tuple (party 0 most
    /// significant).  Settings are 1-based.
    pub fn setting_index(&self, settings: &[u8]) -> Result<usize> {
        if settings.len() != self.n_parties {
            return Err(CoreError::InvalidInput(format!(
                "setting tuple {settings:?} has length {} for {} parties",
                settings.len(),
                self.n_parties
            )));
        }
        let mut idx = 0usize;
        for &s in settings {
            if s < 1 || s > self.n_settings {
                return Err(CoreError::InvalidInput(format!(
                    "setting {s} outside 1..={}",
                    self.n_settings
                )));
            }
            idx = idx * self.n_settings as usize + (s as usize - 1);
        }
        Ok(idx)
    }

    /// Lexicographic index of a joint outcome tuple (party 0 most
    /// significant).  Outcomes are 0-based.
    pub fn outcome_index(&self, outcomes: &[u8]) -> Result<usize> {
        if outcomes.len() != self.n_parties {
            return Err(CoreError::InvalidInput(format!(
                "outcome tuple {outcomes:?} has length {} for {} parties",
                outcomes.len(),
                self.n_parties
            )));
        }
        let mut idx = 0usize;
        for &r in outcomes {
            if r >= self.n_outcomes {
                return Err(CoreError::InvalidInput(format!(
                    "outcome {r} outside 0..{}",
                    self.n_outcomes
                )));
            }
            idx = idx * self.n_outcomes as usize + r as usize;
        }
        Ok(idx)
    }

    /// Inverse of [`Scenario::setting_index`].
    pub fn setting_tuple(&self, mut index: usize) -> SettingTuple {
        let mut v = vec![0u8; self.n_parties];
        for p in (0..self.n_parties).rev() {
            v[p] = (index % self.n_settings as usize) as u8 + 1;
            index /= self.n_settings as usize;
        }
        SettingTuple(v)
    }

    /// Inverse of [`Scenario::outcome_index`].
    pub fn outcome_tuple(&self, mut index: usize) -> OutcomeTuple {
        let mut v = vec![0u8; self.n_parties];
        for p in (0..self.n_parties).rev() {
            v[p] = (index % self.n_outcomes as usize) as u8;
            index /= self.n_outcomes as usize;
        }
        OutcomeTuple(v)
    }

    /// All joint setting tuples in lexicographic order.
    pub fn setting_tuples(&self) -> impl Iterator<Item = SettingTuple> + '_ {
        (0..self.n_setting_tuples()).map(|i| self.setting_tuple(i))
    }

    /// All joint outcome tuples in lexicographic order.
    pub fn outcome_tuples(&self) -> impl Iterator<Item = OutcomeTuple> + '_ {
        (0..self.n_outcome_tuples()).map(|i| self.outcome_tuple(i))
    }

    /// Validates that `perm` is a permutation of `0..N`.
    pub fn check_permutation(&self, perm: &[usize]) -> Result<()> {
        let n = self.n_parties;
        let mut seen = vec![false; n];
        let valid = perm.len() == n
            && perm.iter().all(|&p| {
                if p < n && !seen[p] {
                    seen[p] = true;
                    true
                } else {
                    false
                }
            });
        if valid {
            Ok(())
        } else {
            Err(CoreError::InvalidPermutation {
                perm: perm.to_vec(),
                n_parties: n,
            })
        }
    }
}

/// Joint setting tuple, one 1-based entry per party.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SettingTuple(pub Vec<u8>);

impl SettingTuple {
    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

impl Deref for SettingTuple {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for SettingTuple {
    fn from(v: Vec<u8>) -> Self {
        SettingTuple(v)
    }
}

/// Joint outcome tuple, one 0-based entry per party.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeTuple(pub Vec<u8>);

impl OutcomeTuple {
    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

impl Deref for OutcomeTuple {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for OutcomeTuple {
    fn from(v: Vec<u8>) -> Self {
        OutcomeTuple(v)
    }
}
