//! Randomized invariants that cut across modules: table algebra, functional
//! structure, and the deterministic bound, checked through the public API
//! only.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use svetlichny_core::classical::LocalStrategy;
use svetlichny_core::{nsopt, tol, BehaviorTable, BellFunctional, Scenario};

/// Small scenarios keep each case fast while still mixing N, M and d.
fn scenarios() -> impl Strategy<Value = Scenario> {
    (2usize..=3, 2u8..=3, 2u8..=3).prop_map(|(n, m, d)| Scenario::new(n, m, d).expect("in range"))
}

fn random_behavior(scenario: &Scenario, seed: u64, components: usize) -> BehaviorTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    nsopt::random_nonsignaling_behavior(scenario, &mut rng, components).expect("mixture is valid")
}

proptest! {
    /// The functional averages nonnegative modular weights, so its value is
    /// nonnegative and at most `2M(d-1)` on any valid table.
    #[test]
    fn value_stays_in_algebraic_range(scenario in scenarios(), seed in 0u64..1_000, k in 1usize..4) {
        let f = BellFunctional::build(&scenario).unwrap();
        let behavior = random_behavior(&scenario, seed, k);
        let value = f.evaluate(&behavior).unwrap();
        let top = 2.0 * scenario.n_settings() as f64 * (scenario.n_outcomes() as f64 - 1.0);
        prop_assert!(value >= -tol::IDENTITY);
        prop_assert!(value <= top + tol::IDENTITY);
    }

    /// Every deterministic assignment scores at least `d - 1`: the bound is
    /// a floor over the whole strategy space, not just near the witness.
    #[test]
    fn deterministic_strategies_respect_the_bound(scenario in scenarios(), raw in 0u64..1_000_000) {
        let f = BellFunctional::build(&scenario).unwrap();
        let digits = scenario.n_parties() as u32 * scenario.n_settings() as u32;
        let count = (scenario.n_outcomes() as u64).pow(digits);
        let strategy = LocalStrategy::from_counter(&scenario, raw % count);
        let behavior = strategy.to_behavior(&scenario).unwrap();
        let value = f.evaluate(&behavior).unwrap();
        prop_assert!(value >= f.bilocal_bound() - tol::IDENTITY,
            "strategy {:?} scored {value}", strategy.assignments());
    }

    /// Serialization round-trips bit-for-bit within the documented slack.
    #[test]
    fn json_round_trip_is_faithful(scenario in scenarios(), seed in 0u64..1_000) {
        let behavior = random_behavior(&scenario, seed, 2);
        let text = behavior.to_json().unwrap();
        let back = BehaviorTable::from_json(&text, tol::NORMALIZATION).unwrap();
        for s in scenario.setting_tuples() {
            for r in scenario.outcome_tuples() {
                let a = behavior.prob(&s, &r).unwrap();
                let b = back.prob(&s, &r).unwrap();
                prop_assert!((a - b).abs() <= tol::SERIALIZATION, "{a} vs {b}");
            }
        }
    }

    /// Marginalizing onto any nonempty subset of parties yields a
    /// distribution.
    #[test]
    fn marginals_are_distributions(scenario in scenarios(), seed in 0u64..1_000, mask in 1usize..8) {
        let behavior = random_behavior(&scenario, seed, 2);
        let n = scenario.n_parties();
        let keep: Vec<usize> = (0..n).filter(|p| mask >> p & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let settings: Vec<u8> = vec![1; n];
        let marginal = behavior.marginalize(&keep, &settings).unwrap();
        let sum: f64 = marginal.iter().sum();
        prop_assert!((sum - 1.0).abs() <= tol::NORMALIZATION);
        prop_assert!(marginal.iter().all(|&p| p >= -tol::NORMALIZATION));
    }

    /// Relabeling parties by a permutation and then by its inverse restores
    /// every entry.
    #[test]
    fn permutation_round_trip(scenario in scenarios(), seed in 0u64..1_000, swap in 0usize..3) {
        let behavior = random_behavior(&scenario, seed, 2);
        let n = scenario.n_parties();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(swap % n, (swap + 1) % n);
        let mut inverse = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let back = behavior.permute_parties(&perm).unwrap().permute_parties(&inverse).unwrap();
        for s in scenario.setting_tuples() {
            for r in scenario.outcome_tuples() {
                let a = behavior.prob(&s, &r).unwrap();
                let b = back.prob(&s, &r).unwrap();
                prop_assert!((a - b).abs() <= tol::SERIALIZATION);
            }
        }
    }

    /// Convex mixtures of polytope members stay inside the polytope.
    #[test]
    fn mixtures_stay_nonsignaling(scenario in scenarios(), seed in 0u64..1_000, w in 0.0f64..1.0) {
        let a = random_behavior(&scenario, seed, 2);
        let b = random_behavior(&scenario, seed.wrapping_add(7_919), 3);
        let mixed = BehaviorTable::mix(&[(w, &a), (1.0 - w, &b)], tol::NORMALIZATION).unwrap();
        let report = mixed.check_nonsignaling(tol::NONSIGNALING).unwrap();
        prop_assert!(report.passes(), "deviation {}", report.max_deviation);
    }

    /// Each inequality basis maps back to exactly the term it came from.
    #[test]
    fn bases_and_terms_are_in_bijection(scenario in scenarios()) {
        let f = BellFunctional::build(&scenario).unwrap();
        let m = scenario.n_settings();
        let bases = f.inequality_bases();
        prop_assert_eq!(bases.len(), f.terms().len());
        for basis in &bases {
            let term = f.term_for_basis(&basis.0).expect("each basis has a term");
            prop_assert_eq!(&term.settings(m).0, &basis.0);
        }
    }

    /// The outcome forced on a party by a term constraint really zeroes the
    /// term's modular weight.
    #[test]
    fn forced_outcome_satisfies_the_constraint(
        scenario in scenarios(),
        term_pick in 0usize..64,
        outcome_pick in 0usize..10_000,
        party_pick in 0usize..3,
    ) {
        let f = BellFunctional::build(&scenario).unwrap();
        let m = scenario.n_settings();
        let d = scenario.n_outcomes();
        let term = &f.terms()[term_pick % f.terms().len()];
        let party = party_pick % scenario.n_parties();
        let mut outcomes: Vec<u8> = (0..scenario.n_parties())
            .map(|p| ((outcome_pick >> (2 * p)) as u8) % d)
            .collect();
        outcomes[party] = term.forced_outcome(party, &outcomes, m, d);
        prop_assert_eq!(term.outcome_weight(&outcomes, m, d), 0);
    }

    /// Tuple-index round trips for both coordinate systems.
    #[test]
    fn tuple_indexing_round_trips(scenario in scenarios(), pick in 0usize..100_000) {
        let si = pick % scenario.n_setting_tuples();
        let s = scenario.setting_tuple(si);
        prop_assert_eq!(scenario.setting_index(&s).unwrap(), si);
        let oi = pick % scenario.n_outcome_tuples();
        let r = scenario.outcome_tuple(oi);
        prop_assert_eq!(scenario.outcome_index(&r).unwrap(), oi);
    }
}
