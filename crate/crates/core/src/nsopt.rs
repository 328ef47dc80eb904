//! Optimization over the nonsignaling polytope and the ideal box.
//!
//! The polytope is described by normalization and one-party marginal
//! equalities on the full setting grid; the chained functional enters
//! either as an objective (minimum value) or as a constraint (`I̅ ≤ ε`
//! probes).  An extra ("eavesdropper") party with a single setting supports
//! the monogamy probe.  The ideal box — the unique zero-value point — is
//! constructed directly and certified in exact rational arithmetic.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::behavior::BehaviorTable;
use crate::error::{CoreError, Result};
use crate::functional::BellFunctional;
use crate::lp::{self, LpProblem, LpRow, LpScalar, LpStatus, Relation, Sense};
use crate::scenario::Scenario;
use crate::tol;

/// A full measurement grid where parties may have different setting counts
/// (the eavesdropper has one) but share the outcome alphabet.
#[derive(Debug, Clone)]
struct Grid {
    settings: Vec<u8>,
    d: u8,
}

impl Grid {
    fn uniform(scenario: &Scenario) -> Self {
        Grid {
            settings: vec![scenario.n_settings(); scenario.n_parties()],
            d: scenario.n_outcomes(),
        }
    }

    fn with_single_setting_party(scenario: &Scenario) -> Self {
        let mut settings = vec![scenario.n_settings(); scenario.n_parties()];
        settings.push(1);
        Grid {
            settings,
            d: scenario.n_outcomes(),
        }
    }

    fn n_parties(&self) -> usize {
        self.settings.len()
    }

    fn n_setting_tuples(&self) -> usize {
        self.settings.iter().map(|&m| m as usize).product()
    }

    fn n_outcome_tuples(&self) -> usize {
        (self.d as usize).pow(self.n_parties() as u32)
    }

    fn n_vars(&self) -> usize {
        self.n_setting_tuples() * self.n_outcome_tuples()
    }

    fn setting_index(&self, settings: &[u8]) -> usize {
        let mut idx = 0usize;
        for (p, &s) in settings.iter().enumerate() {
            idx = idx * self.settings[p] as usize + (s as usize - 1);
        }
        idx
    }

    fn outcome_index(&self, outcomes: &[u8]) -> usize {
        outcomes
            .iter()
            .fold(0usize, |acc, &r| acc * self.d as usize + r as usize)
    }

    fn var(&self, setting_index: usize, outcome_index: usize) -> usize {
        setting_index * self.n_outcome_tuples() + outcome_index
    }

    fn setting_tuples(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::with_capacity(self.n_setting_tuples());
        let mut tuple = vec![1u8; self.n_parties()];
        loop {
            out.push(tuple.clone());
            let mut p = self.n_parties();
            loop {
                if p == 0 {
                    return out;
                }
                p -= 1;
                tuple[p] += 1;
                if tuple[p] <= self.settings[p] {
                    break;
                }
                tuple[p] = 1;
            }
        }
    }

    fn outcome_tuples(&self) -> Vec<Vec<u8>> {
        let n = self.n_parties();
        (0..self.n_outcome_tuples())
            .map(|mut idx| {
                let mut tuple = vec![0u8; n];
                for p in (0..n).rev() {
                    tuple[p] = (idx % self.d as usize) as u8;
                    idx /= self.d as usize;
                }
                tuple
            })
            .collect()
    }
}

/// One normalization row per setting tuple.
fn normalization_rows<S: LpScalar>(grid: &Grid) -> Vec<LpRow<S>> {
    let n_out = grid.n_outcome_tuples();
    (0..grid.n_setting_tuples())
        .map(|si| LpRow {
            coeffs: (0..n_out).map(|ri| (grid.var(si, ri), S::one())).collect(),
            relation: Relation::Eq,
            rhs: S::one(),
        })
        .collect()
}

/// One-party marginal equalities: for each party, each combination of the
/// other parties' settings and outcomes, settings 2..M compared against
/// setting 1.  This generating set implies full nonsignaling.
fn nonsignaling_rows<S: LpScalar>(grid: &Grid) -> Vec<LpRow<S>> {
    let n = grid.n_parties();
    let d = grid.d;
    let mut rows = Vec::new();
    let setting_tuples = grid.setting_tuples();
    let outcome_tuples = grid.outcome_tuples();
    for party in 0..n {
        if grid.settings[party] < 2 {
            continue;
        }
        for s in &setting_tuples {
            // Use each others-setting combination once, at reference 1.
            if s[party] != 1 {
                continue;
            }
            let si_ref = grid.setting_index(s);
            for alt in 2..=grid.settings[party] {
                let mut s_alt = s.clone();
                s_alt[party] = alt;
                let si_alt = grid.setting_index(&s_alt);
                for others in outcome_tuples.iter().filter(|r| r[party] == 0) {
                    let mut coeffs = Vec::with_capacity(2 * d as usize);
                    let mut r = others.clone();
                    for outcome in 0..d {
                        r[party] = outcome;
                        let ri = grid.outcome_index(&r);
                        coeffs.push((grid.var(si_alt, ri), S::one()));
                        coeffs.push((grid.var(si_ref, ri), -S::one()));
                    }
                    rows.push(LpRow {
                        coeffs,
                        relation: Relation::Eq,
                        rhs: S::zero(),
                    });
                }
            }
        }
    }
    rows
}

/// Sparse coefficients of the functional over the N-party grid, as integer
/// term values over the regularization denominator.
fn bell_coefficients<S: LpScalar>(functional: &BellFunctional, grid: &Grid) -> Vec<(usize, S)> {
    let scenario = functional.scenario();
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    let denominator = (m as u64).pow(scenario.n_parties() as u32 - 2);
    let mut coeffs = Vec::new();
    for term in functional.terms() {
        let si = grid.setting_index(&term.settings(m));
        for (ri, r) in grid.outcome_tuples().iter().enumerate() {
            let w = term.outcome_weight(r, m, d);
            if w != 0 {
                coeffs.push((grid.var(si, ri), S::from_ratio(w as i64, denominator)));
            }
        }
    }
    coeffs
}

/// Status and certificates of one polytope solve.
#[derive(Debug, Clone, Serialize)]
pub struct NsLpReport {
    pub status: LpStatus,
    pub objective: Option<f64>,
    pub iterations: usize,
    pub residuals: lp::LpResiduals,
}

/// The LP whose optimum is the polytope minimum of the functional; public
/// so the problem can be dumped for external verification.
pub fn min_bell_problem(functional: &BellFunctional) -> LpProblem<f64> {
    let grid = Grid::uniform(functional.scenario());
    let mut rows = normalization_rows(&grid);
    rows.extend(nonsignaling_rows(&grid));
    LpProblem {
        n_vars: grid.n_vars(),
        sense: Sense::Min,
        objective: bell_coefficients(functional, &grid),
        rows,
    }
}

/// Minimum of the functional over all nonsignaling behaviors, with the
/// optimizer returned as a table.
pub fn min_bell_ns(
    functional: &BellFunctional,
    column_cap: usize,
) -> Result<(NsLpReport, BehaviorTable)> {
    let scenario = functional.scenario();
    let problem = min_bell_problem(functional);
    let solution = lp::solve(&problem, column_cap)?;
    if solution.status != LpStatus::Optimal {
        return Err(CoreError::LpNumerical("polytope unexpectedly empty".into()));
    }
    let grid = Grid::uniform(scenario);
    let table = BehaviorTable::from_fn_full(
        scenario,
        |s, r| solution.x[grid.var(grid.setting_index(s), grid.outcome_index(r))],
        tol::LP_FEASIBILITY,
    )?;
    Ok((
        NsLpReport {
            status: solution.status,
            objective: solution.objective,
            iterations: solution.iterations,
            residuals: solution.residuals,
        },
        table,
    ))
}

/// Exact-rational polytope minimum; certifies boundary values.  Guarded by
/// a variable limit because exact pivoting is expensive.
pub fn min_bell_ns_exact(functional: &BellFunctional) -> Result<BigRational> {
    let grid = Grid::uniform(functional.scenario());
    if grid.n_vars() > tol::EXACT_LP_VAR_LIMIT {
        return Err(CoreError::LpTooLarge {
            needed: grid.n_vars(),
            cap: tol::EXACT_LP_VAR_LIMIT,
        });
    }
    let mut rows: Vec<LpRow<BigRational>> = normalization_rows(&grid);
    rows.extend(nonsignaling_rows(&grid));
    let problem = LpProblem {
        n_vars: grid.n_vars(),
        sense: Sense::Min,
        objective: bell_coefficients(functional, &grid),
        rows,
    };
    let solution = lp::solve(&problem, usize::MAX)?;
    solution
        .objective
        .ok_or_else(|| CoreError::LpNumerical("polytope unexpectedly empty".into()))
}

/// The behavior that puts mass `1/d^(N-1)` on exactly the outcome tuples
/// satisfying each inequality basis's term constraint.  Its value is zero —
/// the polytope floor — and every strict-subset marginal is uniform.
pub fn ideal_box(scenario: &Scenario) -> Result<BehaviorTable> {
    let functional = BellFunctional::build(scenario)?;
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    let mass = 1.0 / (d as f64).powi(scenario.n_parties() as i32 - 1);
    let mut entries = Vec::new();
    for basis in functional.inequality_bases() {
        let term = functional
            .term_for_basis(&basis)
            .expect("bases come from the functional");
        for r in scenario.outcome_tuples() {
            if term.outcome_weight(&r, m, d) == 0 {
                entries.push((basis.to_vec(), r.to_vec(), mass));
            }
        }
    }
    BehaviorTable::from_entries(scenario, &entries, tol::NORMALIZATION)
}

/// The functional's value on the ideal box in exact rational arithmetic;
/// certifies the zero independently of any floating point.  Also verifies
/// exactly that each basis's support mass sums to one.
pub fn ideal_box_value_exact(scenario: &Scenario) -> Result<BigRational> {
    let functional = BellFunctional::build(scenario)?;
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    let mass = BigRational::new(
        1.into(),
        num_bigint::BigInt::from(d).pow(scenario.n_parties() as u32 - 1),
    );
    let mut total = BigRational::zero();
    for term in functional.terms() {
        let mut basis_mass = BigRational::zero();
        for r in scenario.outcome_tuples() {
            let w = term.outcome_weight(&r, m, d);
            if w == 0 {
                // Support point: probability `mass`, contributing w·mass.
                basis_mass += mass.clone();
                total += BigRational::from_integer(w.into()) * mass.clone();
            }
        }
        if !basis_mass.is_one() {
            return Err(CoreError::NotNormalized {
                settings: term.settings(m).to_vec(),
                sum: basis_mass.to_f64(),
            });
        }
    }
    Ok(functional.regularization_exact() * total)
}

/// One point of a marginal-probability probe.
#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub epsilon: f64,
    pub lp_value: f64,
    /// `1/d^(N-1) + d(N-1)ε/4`.
    pub bound: f64,
    pub within_bound: bool,
    pub iterations: usize,
    pub residuals: lp::LpResiduals,
}

/// Maximizes the probability of seeing `target_outcomes` on `subset` at
/// `target_setting`, over nonsignaling behaviors with functional value at
/// most ε, for each ε in the grid.
pub fn marginal_bound_probe(
    functional: &BellFunctional,
    subset: &[usize],
    target_setting: &[u8],
    target_outcomes: &[u8],
    epsilons: &[f64],
    column_cap: usize,
) -> Result<Vec<ProbePoint>> {
    let scenario = functional.scenario();
    let n = scenario.n_parties();
    let d = scenario.n_outcomes();
    if subset.len() != n - 1 || !subset.windows(2).all(|w| w[0] < w[1]) {
        return Err(CoreError::InvalidInput(format!(
            "subset {subset:?} must be {} strictly increasing parties",
            n - 1
        )));
    }
    if subset.iter().any(|&p| p >= n) || target_outcomes.len() != subset.len() {
        return Err(CoreError::InvalidInput(
            "subset parties or target outcomes out of range".into(),
        ));
    }
    if functional.term_for_basis(target_setting).is_none() {
        return Err(CoreError::UnsupportedSetting {
            settings: target_setting.to_vec(),
        });
    }
    let grid = Grid::uniform(scenario);
    let si = grid.setting_index(target_setting);
    let objective: Vec<(usize, f64)> = grid
        .outcome_tuples()
        .iter()
        .enumerate()
        .filter(|(_, r)| subset.iter().zip(target_outcomes).all(|(&p, &t)| r[p] == t))
        .map(|(ri, _)| (grid.var(si, ri), 1.0))
        .collect();
    let mut rows: Vec<LpRow<f64>> = normalization_rows(&grid);
    rows.extend(nonsignaling_rows(&grid));
    let bell = bell_coefficients::<f64>(functional, &grid);
    let base = 1.0 / (d as f64).powi(n as i32 - 1);

    let mut points = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if eps < 0.0 {
            return Err(CoreError::InvalidInput(format!(
                "the functional is nonnegative, so the constraint value {eps} is infeasible"
            )));
        }
        let mut rows = rows.clone();
        rows.push(LpRow {
            coeffs: bell.clone(),
            relation: Relation::Le,
            rhs: eps,
        });
        let problem = LpProblem {
            n_vars: grid.n_vars(),
            sense: Sense::Max,
            objective: objective.clone(),
            rows,
        };
        let solution = lp::solve(&problem, column_cap)?;
        let lp_value = solution
            .objective
            .ok_or_else(|| CoreError::LpNumerical("probe LP infeasible".into()))?;
        let bound = base + d as f64 * (n as f64 - 1.0) * eps / 4.0;
        points.push(ProbePoint {
            epsilon: eps,
            lp_value,
            bound,
            within_bound: lp_value <= bound + tol::LP_OBJECTIVE,
            iterations: solution.iterations,
            residuals: solution.residuals,
        });
    }
    Ok(points)
}

/// Maximum probability that an added single-setting party ("eavesdropper")
/// outputs exactly `target_party`'s outcome at `target_setting`, over all
/// nonsignaling extensions whose visible marginal equals `box_behavior` on
/// its support.
pub fn guessing_probability(
    box_behavior: &BehaviorTable,
    target_party: usize,
    target_setting: &[u8],
    column_cap: usize,
) -> Result<NsLpReport> {
    let scenario = *box_behavior.scenario();
    let n = scenario.n_parties();
    if target_party >= n {
        return Err(CoreError::InvalidInput(format!(
            "target party {target_party} out of range for {n} parties"
        )));
    }
    if !box_behavior.supports(target_setting) {
        return Err(CoreError::UnsupportedSetting {
            settings: target_setting.to_vec(),
        });
    }
    let grid = Grid::with_single_setting_party(&scenario);
    let d = grid.d;
    let mut rows: Vec<LpRow<f64>> = normalization_rows(&grid);
    rows.extend(nonsignaling_rows(&grid));

    // Pin the visible N-party marginal to the box on its support.
    let outcome_tuples = grid.outcome_tuples();
    for s in box_behavior.supported_settings() {
        let mut extended = s.to_vec();
        extended.push(1);
        let si = grid.setting_index(&extended);
        for r in scenario.outcome_tuples() {
            let coeffs: Vec<(usize, f64)> = (0..d)
                .map(|e| {
                    let mut full = r.to_vec();
                    full.push(e);
                    (grid.var(si, grid.outcome_index(&full)), 1.0)
                })
                .collect();
            rows.push(LpRow {
                coeffs,
                relation: Relation::Eq,
                rhs: box_behavior.prob(&s, &r)?,
            });
        }
    }

    let mut target = target_setting.to_vec();
    target.push(1);
    let si = grid.setting_index(&target);
    let objective: Vec<(usize, f64)> = outcome_tuples
        .iter()
        .enumerate()
        .filter(|(_, r)| r[n] == r[target_party])
        .map(|(ri, _)| (grid.var(si, ri), 1.0))
        .collect();
    let problem = LpProblem {
        n_vars: grid.n_vars(),
        sense: Sense::Max,
        objective,
        rows,
    };
    let solution = lp::solve(&problem, column_cap)?;
    Ok(NsLpReport {
        status: solution.status,
        objective: solution.objective,
        iterations: solution.iterations,
        residuals: solution.residuals,
    })
}

/// Rank analysis of the single-basis linear system: constraint zeros, all
/// `(N-1)`-party marginals pinned uniform, and normalization.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub basis: Vec<u8>,
    pub n_unknowns: usize,
    pub n_equations: usize,
    pub rank: usize,
    pub consistent: bool,
    pub unique: bool,
    /// When unique: whether the solution is the ideal box on this basis.
    pub matches_ideal_box: Option<bool>,
}

/// Checks whether the zero-value constraint plus uniform marginals pin the
/// single-basis distribution uniquely (they do; the solution is the ideal
/// box).  With `include_marginals` false the system is underdetermined.
pub fn uniqueness_check(
    scenario: &Scenario,
    basis: &[u8],
    include_marginals: bool,
) -> Result<UniquenessReport> {
    let functional = BellFunctional::build(scenario)?;
    let term = functional
        .term_for_basis(basis)
        .ok_or_else(|| CoreError::UnsupportedSetting {
            settings: basis.to_vec(),
        })?;
    let n = scenario.n_parties();
    let m = scenario.n_settings();
    let d = scenario.n_outcomes();
    let n_unknowns = scenario.n_outcome_tuples();
    let outcome_tuples: Vec<_> = scenario.outcome_tuples().collect();

    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let one = BigRational::one();
    let marginal_mass = BigRational::new(1.into(), num_bigint::BigInt::from(d).pow(n as u32 - 1));

    for (ri, r) in outcome_tuples.iter().enumerate() {
        if term.outcome_weight(r, m, d) != 0 {
            let mut row = vec![BigRational::zero(); n_unknowns + 1];
            row[ri] = one.clone();
            rows.push(row);
        }
    }
    if include_marginals {
        for out in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&p| p != out).collect();
            for target in outcome_tuples.iter().filter(|r| r[out] == 0) {
                let mut row = vec![BigRational::zero(); n_unknowns + 1];
                for (ri, r) in outcome_tuples.iter().enumerate() {
                    if keep.iter().all(|&p| r[p] == target[p]) {
                        row[ri] = one.clone();
                    }
                }
                row[n_unknowns] = marginal_mass.clone();
                rows.push(row);
            }
        }
    }
    let mut normalization = vec![one.clone(); n_unknowns];
    normalization.push(one.clone());
    rows.push(normalization);

    let n_equations = rows.len();
    let (rank, consistent, solution) = rational_gauss(rows, n_unknowns);
    let unique = consistent && rank == n_unknowns;
    let matches_ideal_box = solution.map(|x| {
        outcome_tuples.iter().enumerate().all(|(ri, r)| {
            let expected = if term.outcome_weight(r, m, d) == 0 {
                marginal_mass.clone()
            } else {
                BigRational::zero()
            };
            x[ri] == expected
        })
    });
    Ok(UniquenessReport {
        basis: basis.to_vec(),
        n_unknowns,
        n_equations,
        rank,
        consistent,
        unique,
        matches_ideal_box,
    })
}

/// Gauss–Jordan elimination over the rationals on an augmented system.
/// Returns the rank, whether the system is consistent, and the unique
/// solution when there is one.
fn rational_gauss(
    mut rows: Vec<Vec<BigRational>>,
    n_unknowns: usize,
) -> (usize, bool, Option<Vec<BigRational>>) {
    let mut rank = 0usize;
    let mut pivot_cols = Vec::new();
    for col in 0..n_unknowns {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v = v.clone() / inv.clone();
        }
        for i in 0..rows.len() {
            if i == rank || rows[i][col].is_zero() {
                continue;
            }
            let factor = rows[i][col].clone();
            for j in 0..=n_unknowns {
                let delta = factor.clone() * rows[rank][j].clone();
                rows[i][j] = rows[i][j].clone() - delta;
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    let consistent = rows[rank..].iter().all(|row| row[n_unknowns].is_zero());
    let solution = if consistent && rank == n_unknowns {
        let mut x = vec![BigRational::zero(); n_unknowns];
        for (i, &col) in pivot_cols.iter().enumerate() {
            x[col] = rows[i][n_unknowns].clone();
        }
        Some(x)
    } else {
        None
    };
    (rank, consistent, solution)
}

/// A random interior-ish point of the polytope: a convex mixture of random
/// local deterministic boxes plus, when the ideal box covers the full grid
/// (M = 2), the ideal box itself; otherwise the uniform behavior.
pub fn random_nonsignaling_behavior<R: Rng>(
    scenario: &Scenario,
    rng: &mut R,
    n_deterministic: usize,
) -> Result<BehaviorTable> {
    let special = {
        let candidate = ideal_box(scenario)?;
        if candidate.is_full_grid() {
            candidate
        } else {
            BehaviorTable::uniform(scenario)
        }
    };
    let mut components = vec![special];
    for _ in 0..n_deterministic.max(1) {
        let assign: Vec<Vec<u8>> = (0..scenario.n_parties())
            .map(|_| {
                (0..scenario.n_settings())
                    .map(|_| rng.random_range(0..scenario.n_outcomes()))
                    .collect()
            })
            .collect();
        components.push(BehaviorTable::from_local_assignment(scenario, &assign)?);
    }
    let mut weights: Vec<f64> = (0..components.len()).map(|_| rng.random::<f64>()).collect();
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= sum;
    }
    let parts: Vec<(f64, &BehaviorTable)> =
        weights.iter().copied().zip(components.iter()).collect();
    BehaviorTable::mix(&parts, tol::NORMALIZATION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sc(n: usize, m: u8, d: u8) -> Scenario {
        Scenario::new(n, m, d).unwrap()
    }

    #[test]
    fn two_party_ideal_box_is_the_pr_pattern() {
        let scenario = sc(2, 2, 2);
        let b = ideal_box(&scenario).unwrap();
        assert!(b.is_full_grid());
        // Correlated on the three chained pairs…
        for s in [[1u8, 1], [2, 1], [2, 2]] {
            assert_eq!(b.prob(&s, &[0, 0]).unwrap(), 0.5, "{s:?}");
            assert_eq!(b.prob(&s, &[1, 1]).unwrap(), 0.5);
            assert_eq!(b.prob(&s, &[0, 1]).unwrap(), 0.0);
        }
        // …anticorrelated on the wrap pair.
        assert_eq!(b.prob(&[1, 2], &[0, 1]).unwrap(), 0.5);
        assert_eq!(b.prob(&[1, 2], &[1, 0]).unwrap(), 0.5);
        assert_eq!(b.prob(&[1, 2], &[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn ideal_box_support_and_marginals() {
        let scenario = sc(3, 2, 2);
        let b = ideal_box(&scenario).unwrap();
        assert!(b.is_full_grid()); // 2M² = M³ at M = 2
        for s in b.supported_settings() {
            let block = b.block(&s).unwrap();
            assert_eq!(block.iter().filter(|&&p| p > 0.0).count(), 4);
            for pair in [[0usize, 1], [0, 2], [1, 2]] {
                for p in b.marginalize(&pair, &s).unwrap() {
                    assert!((p - 0.25).abs() < 1e-15);
                }
            }
        }
        let report = b.check_nonsignaling(1e-12).unwrap();
        assert!(report.max_deviation < 1e-12);

        // Sparse case: 2M^(N-1) of M^N bases.
        let b = ideal_box(&sc(3, 3, 2)).unwrap();
        assert!(!b.is_full_grid());
        assert_eq!(b.n_supported_settings(), 18);
        assert!(b.check_nonsignaling_on_support(1e-12).unwrap().passes());
    }

    #[test]
    fn ideal_box_value_is_exactly_zero() {
        for (n, m, d) in [(2, 2, 2), (3, 2, 2), (3, 3, 2), (2, 2, 3), (4, 2, 3)] {
            let scenario = sc(n, m, d);
            assert!(ideal_box_value_exact(&scenario).unwrap().is_zero());
            let f = BellFunctional::build(&scenario).unwrap();
            let value = f.evaluate(&ideal_box(&scenario).unwrap()).unwrap();
            assert_eq!(value, 0.0, "({n},{m},{d})");
        }
    }

    #[test]
    fn polytope_minimum_is_the_floor() {
        for (n, m, d) in [(2, 2, 2), (2, 3, 2), (3, 2, 2)] {
            let f = BellFunctional::build(&sc(n, m, d)).unwrap();
            let (report, table) = min_bell_ns(&f, tol::DEFAULT_LP_COLUMN_CAP).unwrap();
            let value = report.objective.unwrap();
            assert!(value.abs() < tol::LP_FEASIBILITY, "({n},{m},{d}): {value}");
            assert!(table
                .check_nonsignaling(tol::LP_FEASIBILITY)
                .unwrap()
                .passes());
            // Theorem-level consequence: marginals at the floor are uniform.
            let base = 1.0 / (d as f64).powi(n as i32 - 1);
            for basis in f.inequality_bases() {
                for keep in 0..n {
                    let keep: Vec<usize> = (0..n).filter(|&p| p != keep).collect();
                    for p in table.marginalize(&keep, &basis).unwrap() {
                        assert!((p - base).abs() < tol::LP_FEASIBILITY);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_minimum_is_rational_zero() {
        let f = BellFunctional::build(&sc(2, 2, 2)).unwrap();
        assert!(min_bell_ns_exact(&f).unwrap().is_zero());
    }

    #[test]
    fn normalization_only_lp_matches_hand_value() {
        // Minimizing total mass at one setting under normalization gives 1.
        let grid = Grid::uniform(&sc(2, 2, 2));
        let problem = LpProblem {
            n_vars: grid.n_vars(),
            sense: Sense::Min,
            objective: (0..grid.n_outcome_tuples())
                .map(|ri| (grid.var(0, ri), 1.0))
                .collect(),
            rows: normalization_rows(&grid),
        };
        let solution = lp::solve(&problem, 1000).unwrap();
        assert!((solution.objective.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn probe_matches_theorem_bound_shape() {
        let f = BellFunctional::build(&sc(2, 2, 2)).unwrap();
        let points = marginal_bound_probe(
            &f,
            &[0],
            &[1, 1],
            &[0],
            &[0.0, 0.05, 0.1],
            tol::DEFAULT_LP_COLUMN_CAP,
        )
        .unwrap();
        assert!((points[0].lp_value - 0.5).abs() < tol::LP_OBJECTIVE);
        for p in &points {
            assert!(
                p.within_bound,
                "ε={}: {} > {}",
                p.epsilon, p.lp_value, p.bound
            );
        }
        // Monotone nondecreasing in ε.
        for w in points.windows(2) {
            assert!(w[1].lp_value >= w[0].lp_value - 1e-9);
        }
    }

    #[test]
    fn probe_rejects_bad_requests() {
        let f = BellFunctional::build(&sc(2, 2, 2)).unwrap();
        assert!(marginal_bound_probe(&f, &[0, 1], &[1, 1], &[0, 0], &[0.0], 1000).is_err());
        assert!(marginal_bound_probe(&f, &[0], &[1, 1], &[0], &[-0.1], 1000).is_err());
        // (1,2) is a basis but (2,1)… let's use a non-basis tuple: none at
        // M=2 (full grid), so drop to checking an invalid tuple instead.
        assert!(marginal_bound_probe(&f, &[0], &[3, 1], &[0], &[0.0], 1000).is_err());
    }

    #[test]
    fn eavesdropper_cannot_beat_a_dit_guess_on_the_ideal_box() {
        let b = ideal_box(&sc(2, 2, 2)).unwrap();
        let report = guessing_probability(&b, 0, &[1, 1], tol::DEFAULT_LP_COLUMN_CAP).unwrap();
        assert!((report.objective.unwrap() - 0.5).abs() < tol::LP_OBJECTIVE);
    }

    #[test]
    fn deterministic_boxes_are_perfectly_guessable() {
        let scenario = sc(2, 2, 2);
        let b = BehaviorTable::from_local_assignment(&scenario, &[vec![1, 0], vec![0, 0]]).unwrap();
        let report = guessing_probability(&b, 0, &[1, 1], tol::DEFAULT_LP_COLUMN_CAP).unwrap();
        assert!((report.objective.unwrap() - 1.0).abs() < tol::LP_OBJECTIVE);
    }

    #[test]
    fn single_basis_system_is_unique_with_marginals_only() {
        let scenario = sc(2, 2, 2);
        let report = uniqueness_check(&scenario, &[1, 1], true).unwrap();
        assert!(report.unique);
        assert_eq!(report.rank, 4);
        assert_eq!(report.matches_ideal_box, Some(true));

        let report = uniqueness_check(&scenario, &[1, 1], false).unwrap();
        assert!(!report.unique);
        assert!(report.rank < report.n_unknowns);

        let scenario = sc(3, 2, 2);
        for basis in BellFunctional::build(&scenario).unwrap().inequality_bases() {
            let report = uniqueness_check(&scenario, &basis, true).unwrap();
            assert!(report.unique, "{basis:?}");
            assert_eq!(report.matches_ideal_box, Some(true));
        }
    }

    #[test]
    fn uniqueness_rejects_non_bases() {
        let scenario = sc(2, 3, 2);
        // At M=3 only 6 of the 9 setting pairs are inequality bases.
        let f = BellFunctional::build(&scenario).unwrap();
        let non_basis = scenario
            .setting_tuples()
            .find(|s| f.term_for_basis(s).is_none())
            .unwrap();
        assert!(uniqueness_check(&scenario, &non_basis, true).is_err());
    }

    #[test]
    fn random_mixtures_stay_in_the_polytope() {
        let scenario = sc(3, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b = random_nonsignaling_behavior(&scenario, &mut rng, 6).unwrap();
            assert!(b.check_nonsignaling(tol::NONSIGNALING).unwrap().passes());
        }
    }

    #[test]
    fn polytope_chain_orders_the_three_minima() {
        let scenario = sc(2, 2, 2);
        let f = BellFunctional::build(&scenario).unwrap();
        let ns = min_bell_ns(&f, tol::DEFAULT_LP_COLUMN_CAP)
            .unwrap()
            .0
            .objective
            .unwrap();
        let quantum = crate::quantum::QuantumModel::new(&scenario)
            .unwrap()
            .bell_value(&f)
            .unwrap();
        assert!(ns < quantum + 1e-8);
        assert!(quantum < f.bilocal_bound());
    }
}
