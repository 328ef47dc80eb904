//! Numerical checkers for the proof machinery behind the marginal-bound
//! theorem: the marginal bound itself, the expectation floor, the overlap
//! bound, grid-distance identities, and constraint-violation mass.

use serde::Serialize;

use crate::behavior::{kahan_sum, BehaviorTable};
use crate::error::{CoreError, Result};
use crate::functional::{BellFunctional, ChainedTerm};
use crate::tol;

/// Marginal bound for one inequality basis.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalBasisReport {
    pub basis: Vec<u8>,
    pub max_marginal: f64,
    pub pass: bool,
}

/// Marginal bound over one `(N-1)`-party subset, at the behavior's own
/// functional value ε: every marginal probability must stay below
/// `1/d^(N-1) + d(N-1)ε/4`.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalReport {
    pub subset: Vec<usize>,
    pub epsilon: f64,
    pub bound: f64,
    pub per_basis: Vec<MarginalBasisReport>,
    pub pass: bool,
}

/// Checks the marginal bound for every `(N-1)`-party subset and every
/// inequality basis.  A failure falsifies either the behavior's
/// nonsignaling status or the implementation.
pub fn check_marginal_bound(
    behavior: &BehaviorTable,
    functional: &BellFunctional,
) -> Result<Vec<MarginalReport>> {
    let scenario = functional.scenario();
    let n = scenario.n_parties();
    let d = scenario.n_outcomes() as f64;
    let epsilon = functional.evaluate(behavior)?;
    let bound = 1.0 / d.powi(n as i32 - 1) + d * (n as f64 - 1.0) * epsilon / 4.0;
    let bases = functional.inequality_bases();
    let mut reports = Vec::with_capacity(n);
    for dropped in (0..n).rev() {
        let subset: Vec<usize> = (0..n).filter(|&p| p != dropped).collect();
        let mut per_basis = Vec::with_capacity(bases.len());
        let mut pass = true;
        for basis in &bases {
            let marginals = behavior.marginalize(&subset, basis)?;
            let max_marginal = marginals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ok = max_marginal <= bound + tol::BOUND_SLACK;
            pass &= ok;
            per_basis.push(MarginalBasisReport {
                basis: basis.to_vec(),
                max_marginal,
                pass: ok,
            });
        }
        reports.push(MarginalReport {
            subset,
            epsilon,
            bound,
            per_basis,
            pass,
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationFloorReport {
    pub expectation: f64,
    pub floor: f64,
    pub pass: bool,
}

/// For any distribution over `0..d-1`: `Σ i·P(i) ≥ 1 − P(0)`, since every
/// nonzero value contributes at least one.
pub fn check_expectation_floor(distribution: &[f64]) -> Result<ExpectationFloorReport> {
    if distribution.len() < 2 {
        return Err(CoreError::InvalidInput(
            "distribution needs at least two outcomes".into(),
        ));
    }
    let sum = kahan_sum(distribution.iter().copied());
    if distribution
        .iter()
        .any(|&p| !p.is_finite() || p < -tol::NORMALIZATION)
        || (sum - 1.0).abs() > tol::NORMALIZATION
    {
        return Err(CoreError::NotNormalized {
            settings: vec![],
            sum,
        });
    }
    let expectation = kahan_sum(distribution.iter().enumerate().map(|(i, &p)| i as f64 * p));
    let floor = 1.0 - distribution[0];
    Ok(ExpectationFloorReport {
        expectation,
        floor,
        pass: expectation >= floor - tol::IDENTITY,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub settings: Vec<u8>,
    pub anchor: Vec<u8>,
    pub forced_last_outcome: u8,
    /// Probability that the term constraint is satisfied.
    pub lhs: f64,
    /// P(first N−1 parties = anchor).
    pub first_marginal: f64,
    /// P(last N−1 parties = (anchor[1..], forced)).
    pub second_marginal: f64,
    /// `1 − |first − second|`.
    pub rhs: f64,
    pub pass: bool,
}

/// The overlap bound: the probability of satisfying a term constraint is at
/// most `1 − |P(first N−1 = anchor) − P(last N−1 = shifted anchor)|`, where
/// the shifted anchor replaces the first party by the constraint-forced
/// outcome of the last.  Holds pointwise for any distribution, signaling or
/// not: on the constraint's support, each marginal event forces the other.
pub fn check_overlap_bound_term(
    behavior: &BehaviorTable,
    term: &ChainedTerm,
    anchor: &[u8],
) -> Result<OverlapReport> {
    let scenario = behavior.scenario();
    let n = scenario.n_parties();
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    if anchor.len() != n - 1 || anchor.iter().any(|&a| a >= d) {
        return Err(CoreError::InvalidInput(format!(
            "anchor {anchor:?} must give {} outcomes below {d}",
            n - 1
        )));
    }
    let settings = term.settings(m);
    let block = behavior.block(&settings)?;

    let mut probe = anchor.to_vec();
    probe.push(0);
    let forced = term.forced_outcome(n - 1, &probe, m, d);
    let mut shifted = anchor[1..].to_vec();
    shifted.push(forced);

    let mut lhs = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for (ri, &p) in block.iter().enumerate() {
        let r = scenario.outcome_tuple(ri);
        if term.outcome_weight(&r, m, d) == 0 {
            lhs += p;
        }
        if r[..n - 1] == *anchor {
            first += p;
        }
        if r[1..] == shifted[..] {
            second += p;
        }
    }
    let rhs = 1.0 - (first - second).abs();
    Ok(OverlapReport {
        settings: settings.to_vec(),
        anchor: anchor.to_vec(),
        forced_last_outcome: forced,
        lhs,
        first_marginal: first,
        second_marginal: second,
        rhs,
        pass: lhs <= rhs + tol::IDENTITY,
    })
}

/// Overlap bound at a setting tuple: uses the tuple's own inequality term
/// when it is a basis (outcome offsets included), and the plain
/// alternating-sign constraint otherwise.
pub fn check_overlap_bound(
    behavior: &BehaviorTable,
    functional: &BellFunctional,
    settings: &[u8],
    anchor: &[u8],
) -> Result<OverlapReport> {
    match functional.term_for_basis(settings) {
        Some(term) => check_overlap_bound_term(behavior, term, anchor),
        None => check_overlap_bound_term(behavior, &ChainedTerm::unshifted(settings), anchor),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridDistanceReport {
    pub d: u8,
    /// Sum of distances to 0 over the symmetric window of grid offsets.
    pub sum: u64,
    /// `(d²−1)/4` for odd `d`, `d²/4` for even.
    pub expected: u64,
    pub pass: bool,
}

/// Sums `|i|` over the window `D⁻..=D⁺` of nearest-wrap grid offsets
/// (`D⁺ = (d−1)/2 = −D⁻` odd, `D⁺ = d/2`, `D⁻ = −d/2 + 1` even) and
/// compares with the closed form.
pub fn grid_distance_sum(d: u8) -> GridDistanceReport {
    let di = d as i64;
    let (lo, hi) = if d % 2 == 1 {
        (-(di - 1) / 2, (di - 1) / 2)
    } else {
        (-di / 2 + 1, di / 2)
    };
    let sum = (lo..=hi).map(|i| i.unsigned_abs()).sum();
    let expected = if d % 2 == 1 {
        ((di * di - 1) / 4) as u64
    } else {
        ((di * di) / 4) as u64
    };
    GridDistanceReport {
        d,
        sum,
        expected,
        pass: sum == expected,
    }
}

/// Maximum, over inequality bases, of the probability mass on outcome
/// tuples violating the basis's term constraint.  Zero exactly when the
/// functional's value is zero.
pub fn max_violation_mass(behavior: &BehaviorTable, functional: &BellFunctional) -> Result<f64> {
    let scenario = functional.scenario();
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    let mut worst = 0.0f64;
    for term in functional.terms() {
        let block = behavior.block(&term.settings(m))?;
        let mut mass = 0.0;
        for (ri, &p) in block.iter().enumerate() {
            if term.outcome_weight(&scenario.outcome_tuple(ri), m, d) != 0 {
                mass += p.max(0.0);
            }
        }
        worst = worst.max(mass);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nsopt;
    use crate::quantum::{QuantumModel, QuantumSupport};
    use crate::scenario::Scenario;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sc(n: usize, m: u8, d: u8) -> Scenario {
        Scenario::new(n, m, d).unwrap()
    }

    fn functional(scenario: &Scenario) -> BellFunctional {
        BellFunctional::build(scenario).unwrap()
    }

    /// Arbitrary normalized (generally signaling) behavior.
    fn random_table(scenario: &Scenario, rng: &mut ChaCha8Rng) -> BehaviorTable {
        BehaviorTable::from_fn_full(scenario, |_, _| rng.random::<f64>(), f64::INFINITY)
            .map(|raw| {
                // Renormalize each block.
                let entries: Vec<(Vec<u8>, Vec<u8>, f64)> = scenario
                    .setting_tuples()
                    .flat_map(|s| {
                        let block = raw.block(&s).unwrap().to_vec();
                        let sum: f64 = block.iter().sum();
                        scenario
                            .outcome_tuples()
                            .zip(block)
                            .map(move |(r, p)| (s.to_vec(), r.to_vec(), p / sum))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                BehaviorTable::from_entries(scenario, &entries, tol::NORMALIZATION).unwrap()
            })
            .unwrap()
    }

    #[test]
    fn ideal_box_saturates_the_marginal_bound_at_zero() {
        let scenario = sc(3, 2, 2);
        let f = functional(&scenario);
        let b = nsopt::ideal_box(&scenario).unwrap();
        let reports = check_marginal_bound(&b, &f).unwrap();
        assert_eq!(reports.len(), 3);
        for report in &reports {
            assert!(report.pass);
            assert!(report.epsilon.abs() < 1e-15);
            assert!((report.bound - 0.25).abs() < 1e-15);
            for basis in &report.per_basis {
                assert!((basis.max_marginal - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantum_and_uniform_behaviors_respect_the_marginal_bound() {
        let scenario = sc(3, 2, 2);
        let f = functional(&scenario);
        let b = QuantumModel::new(&scenario)
            .unwrap()
            .behavior(QuantumSupport::FullGrid)
            .unwrap();
        assert!(check_marginal_bound(&b, &f).unwrap().iter().all(|r| r.pass));

        let uniform = BehaviorTable::uniform(&scenario);
        let reports = check_marginal_bound(&uniform, &f).unwrap();
        // ε = M(d−1) makes the bound vacuous but still satisfied.
        assert!((reports[0].epsilon - 2.0).abs() < 1e-12);
        assert!(reports[0].bound > 1.0);
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn expectation_floor_known_cases() {
        let r = check_expectation_floor(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!((r.expectation, r.floor), (0.0, 0.0));
        assert!(r.pass);

        let third = 1.0 / 3.0;
        let r = check_expectation_floor(&[third, third, third]).unwrap();
        assert!((r.expectation - 1.0).abs() < 1e-12);
        assert!((r.floor - 2.0 / 3.0).abs() < 1e-12);
        assert!(r.pass);

        // Point mass at 1 meets the floor with equality.
        let r = check_expectation_floor(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!((r.expectation, r.floor), (1.0, 1.0));
        assert!(r.pass);

        assert!(check_expectation_floor(&[0.5, 0.2]).is_err());
        assert!(check_expectation_floor(&[1.0]).is_err());
    }

    #[test]
    fn expectation_floor_holds_on_random_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let d = rng.random_range(2..=6);
            let mut p: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= sum);
            assert!(check_expectation_floor(&p).unwrap().pass);
        }
    }

    #[test]
    fn overlap_bound_is_tight_on_the_ideal_box() {
        let scenario = sc(3, 2, 2);
        let f = functional(&scenario);
        let b = nsopt::ideal_box(&scenario).unwrap();
        for basis in f.inequality_bases() {
            let report = check_overlap_bound(&b, &f, &basis, &[0, 0]).unwrap();
            assert!((report.lhs - 1.0).abs() < 1e-12, "{basis:?}");
            assert!((report.rhs - 1.0).abs() < 1e-12);
            assert!((report.first_marginal - 0.25).abs() < 1e-12);
            assert!((report.second_marginal - 0.25).abs() < 1e-12);
            assert!(report.pass);
        }
    }

    #[test]
    fn overlap_bound_on_deterministic_boxes_is_zero_or_one() {
        let scenario = sc(3, 2, 2);
        let f = functional(&scenario);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let assign: Vec<Vec<u8>> = (0..3)
                .map(|_| (0..2).map(|_| rng.random_range(0..2)).collect())
                .collect();
            let b = BehaviorTable::from_local_assignment(&scenario, &assign).unwrap();
            let anchor = [rng.random_range(0..2), rng.random_range(0..2)];
            for basis in f.inequality_bases() {
                let report = check_overlap_bound(&b, &f, &basis, &anchor).unwrap();
                assert!(report.lhs == 0.0 || report.lhs == 1.0);
                assert!(report.pass);
            }
        }
    }

    #[test]
    fn overlap_bound_holds_even_for_signaling_tables() {
        let scenario = sc(3, 2, 2);
        let f = functional(&scenario);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..100 {
            let b = random_table(&scenario, &mut rng);
            let anchor = [rng.random_range(0..2), rng.random_range(0..2)];
            for s in scenario.setting_tuples() {
                let report = check_overlap_bound(&b, &f, &s, &anchor).unwrap();
                assert!(report.pass, "trial {trial} at {s:?}: {report:?}");
            }
        }
    }

    #[test]
    fn grid_distance_sums_match_closed_forms() {
        for d in 2..=12 {
            let r = grid_distance_sum(d);
            assert!(r.pass, "d={d}: {} vs {}", r.sum, r.expected);
        }
        assert_eq!(grid_distance_sum(3).sum, 2);
        assert_eq!(grid_distance_sum(2).sum, 1);
        assert_eq!(grid_distance_sum(5).sum, 6);
    }

    #[test]
    fn violation_mass_vanishes_exactly_on_the_ideal_box() {
        let scenario = sc(3, 2, 2);
        let f = functional(&scenario);
        let box_behavior = nsopt::ideal_box(&scenario).unwrap();
        assert_eq!(max_violation_mass(&box_behavior, &f).unwrap(), 0.0);

        let uniform = BehaviorTable::uniform(&scenario);
        assert!((max_violation_mass(&uniform, &f).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn violation_mass_vanishes_exactly_when_the_value_does() {
        let scenario = sc(2, 2, 2);
        let f = functional(&scenario);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let b = nsopt::random_nonsignaling_behavior(&scenario, &mut rng, 4).unwrap();
            let mass = max_violation_mass(&b, &f).unwrap();
            let value = f.evaluate(&b).unwrap();
            assert_eq!(
                mass == 0.0,
                value.abs() < 1e-12,
                "mass {mass} value {value}"
            );
            assert!(value <= 4.0 * mass + 1e-12);
        }
    }

    #[test]
    fn quantum_violation_mass_decreases_with_settings() {
        let mut last = f64::INFINITY;
        for m in [2u8, 4, 8] {
            let scenario = sc(2, m, 2);
            let f = functional(&scenario);
            let b = QuantumModel::new(&scenario)
                .unwrap()
                .behavior(QuantumSupport::InequalityBases)
                .unwrap();
            let mass = max_violation_mass(&b, &f).unwrap();
            assert!(mass < last, "M={m}: {mass} ≥ {last}");
            last = mass;
        }
    }
}
