//! A small two-phase simplex solver over a generic scalar.
//!
//! The polytopes in this crate are tiny by LP standards (hundreds of
//! variables) but the quantities of interest live exactly on the boundary,
//! so the solver favours verifiability over speed: dense tableau, Bland's
//! anti-cycling rule, explicit residual reporting, and an exact
//! `BigRational` instantiation for certifying boundary values.
//!
//! Variables are implicitly nonnegative (they are probabilities here).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{CoreError, Result};
use crate::tol;

/// Scalar a tableau can be built over: `f64` with a pivot tolerance, or
/// `BigRational` with exact comparisons.
pub trait LpScalar:
    Clone
    + std::fmt::Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(numerator: i64, denominator: u64) -> Self;
    fn to_f64(&self) -> f64;
    /// `x < -pivot tolerance`.
    fn is_below_zero(&self) -> bool;
    /// `x > pivot tolerance`.
    fn is_above_zero(&self) -> bool;
}

impl LpScalar for f64 {
    fn from_ratio(numerator: i64, denominator: u64) -> Self {
        numerator as f64 / denominator as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_below_zero(&self) -> bool {
        *self < -tol::LP_PIVOT
    }
    fn is_above_zero(&self) -> bool {
        *self > tol::LP_PIVOT
    }
}

impl LpScalar for BigRational {
    fn from_ratio(numerator: i64, denominator: u64) -> Self {
        BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
    }
    fn to_f64(&self) -> f64 {
        let num = self.numer();
        let den = self.denom();
        // Good enough for reporting; exact work never round-trips via f64.
        let nf = num.to_string().parse::<f64>().unwrap_or(f64::NAN);
        let df = den.to_string().parse::<f64>().unwrap_or(f64::NAN);
        nf / df
    }
    fn is_below_zero(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_above_zero(&self) -> bool {
        Signed::is_positive(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub struct LpRow<S> {
    /// Sparse `(column, coefficient)` pairs; duplicate columns accumulate.
    pub coeffs: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
}

#[derive(Debug, Clone)]
pub struct LpProblem<S> {
    pub n_vars: usize,
    pub sense: Sense,
    pub objective: Vec<(usize, S)>,
    pub rows: Vec<LpRow<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// Residuals of the returned point against the *original* problem data,
/// always reported in doubles.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LpResiduals {
    /// Worst constraint violation (and negativity of any variable).
    pub primal: f64,
    /// Worst violated optimality condition (negative reduced cost for a
    /// minimization).
    pub dual: f64,
    /// Worst `|x_j · reduced_cost_j|`.
    pub complementarity: f64,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// In the problem's own sense; `None` when infeasible.
    pub objective: Option<S>,
    pub x: Vec<S>,
    /// One multiplier per input row (equality-form convention for the
    /// internal minimization); zero for rows found redundant.
    pub duals: Vec<S>,
    pub iterations: usize,
    pub residuals: LpResiduals,
}

struct Tableau<S> {
    /// `rows × (n_cols + 1)`; last column is the right-hand side.
    rows: Vec<Vec<S>>,
    cost: Vec<S>,
    basis: Vec<usize>,
    n_cols: usize,
    n_structural: usize,
    first_artificial: usize,
    /// For each surviving tableau row, the input row it came from and its
    /// initial identity column (slack or artificial) used to read duals.
    row_origin: Vec<usize>,
    record_col: Vec<usize>,
    iterations: usize,
}

impl<S: LpScalar> Tableau<S> {
    fn value_of(&self, col: usize) -> S {
        for (i, &b) in self.basis.iter().enumerate() {
            if b == col {
                return self.rows[i][self.n_cols].clone();
            }
        }
        S::zero()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor == S::zero() {
                continue;
            }
            for j in 0..=self.n_cols {
                let delta = factor.clone() * self.rows[row][j].clone();
                self.rows[i][j] = self.rows[i][j].clone() - delta;
            }
        }
        let factor = self.cost[col].clone();
        if factor != S::zero() {
            for j in 0..=self.n_cols {
                let delta = factor.clone() * self.rows[row][j].clone();
                self.cost[j] = self.cost[j].clone() - delta;
            }
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Runs simplex on the current cost row with Bland's rule.  `barred`
    /// marks columns that may never enter (artificials in phase 2).
    fn optimize(&mut self, barred_from: usize, max_iterations: usize) -> Result<()> {
        loop {
            if self.iterations > max_iterations {
                return Err(CoreError::LpNumerical(format!(
                    "simplex stalled after {max_iterations} iterations \
                     ({} rows, {} columns)",
                    self.rows.len(),
                    self.n_cols
                )));
            }
            // Bland: first improving column.
            let entering = (0..barred_from).find(|&j| self.cost[j].is_below_zero());
            let Some(entering) = entering else {
                return Ok(());
            };
            // Ratio test; ties broken by smallest basis variable (Bland).
            let mut leaving: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][entering];
                if !a.is_above_zero() {
                    continue;
                }
                let ratio = self.rows[i][self.n_cols].clone() / a.clone();
                let better = match &leaving {
                    None => true,
                    Some((best_i, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*best_i])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return Err(CoreError::LpNumerical(format!(
                    "objective unbounded along column {entering}"
                )));
            };
            self.pivot(row, entering);
        }
    }
}

/// Solves the problem; `column_cap` bounds the tableau width (structural +
/// slack + artificial columns).
pub fn solve<S: LpScalar>(problem: &LpProblem<S>, column_cap: usize) -> Result<LpSolution<S>> {
    let n = problem.n_vars;
    let m = problem.rows.len();
    let n_slacks = problem
        .rows
        .iter()
        .filter(|r| r.relation == Relation::Le)
        .count();
    let n_cols = n + n_slacks + m;
    if n_cols > column_cap {
        return Err(CoreError::LpTooLarge {
            needed: n_cols,
            cap: column_cap,
        });
    }
    for row in &problem.rows {
        for &(col, ref c) in &row.coeffs {
            if col >= n {
                return Err(CoreError::InvalidInput(format!(
                    "row references column {col} but the problem has {n} variables"
                )));
            }
            if !c.to_f64().is_finite() {
                return Err(CoreError::InvalidInput("non-finite coefficient".into()));
            }
        }
        if !row.rhs.to_f64().is_finite() {
            return Err(CoreError::InvalidInput("non-finite right-hand side".into()));
        }
    }

    // Internal form: minimize.  Max problems flip the objective.
    let sense_factor = match problem.sense {
        Sense::Min => S::one(),
        Sense::Max => -S::one(),
    };
    let mut objective = vec![S::zero(); n];
    for &(col, ref c) in &problem.objective {
        objective[col] = objective[col].clone() + sense_factor.clone() * c.clone();
    }

    let first_artificial = n + n_slacks;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut record_col = Vec::with_capacity(m);
    let mut need_phase1 = false;
    let mut slack_cursor = n;
    for (i, row) in problem.rows.iter().enumerate() {
        let mut dense = vec![S::zero(); n_cols + 1];
        for &(col, ref c) in &row.coeffs {
            dense[col] = dense[col].clone() + c.clone();
        }
        let mut slack_col = None;
        if row.relation == Relation::Le {
            dense[slack_cursor] = S::one();
            slack_col = Some(slack_cursor);
            slack_cursor += 1;
        }
        dense[n_cols] = row.rhs.clone();
        let negative_rhs = dense[n_cols].is_below_zero() || dense[n_cols] < S::zero();
        if negative_rhs {
            for v in dense.iter_mut() {
                *v = -v.clone();
            }
        }
        // A nonnegated slack can seed the basis; otherwise an artificial.
        match slack_col {
            Some(sc) if !negative_rhs => {
                basis.push(sc);
                record_col.push(sc);
            }
            _ => {
                let art = first_artificial + i;
                dense[art] = S::one();
                basis.push(art);
                record_col.push(art);
                need_phase1 = true;
            }
        }
        rows.push(dense);
    }

    let mut tableau = Tableau {
        rows,
        cost: vec![S::zero(); n_cols + 1],
        basis,
        n_cols,
        n_structural: n,
        first_artificial,
        row_origin: (0..m).collect(),
        record_col,
        iterations: 0,
    };
    let max_iterations = 20_000 + 60 * (m + n_cols);

    if need_phase1 {
        // Phase-1 cost: sum of artificials, expressed in reduced form over
        // the initial basis.
        for i in 0..m {
            if tableau.basis[i] >= first_artificial {
                for j in 0..=n_cols {
                    let delta = tableau.rows[i][j].clone();
                    tableau.cost[j] = tableau.cost[j].clone() - delta;
                }
            }
        }
        for art in first_artificial..n_cols {
            tableau.cost[art] = S::zero();
        }
        tableau.optimize(n_cols, max_iterations)?;
        let infeasibility = -tableau.cost[n_cols].clone();
        if infeasibility.is_above_zero() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: None,
                x: vec![S::zero(); n],
                duals: vec![S::zero(); m],
                iterations: tableau.iterations,
                residuals: LpResiduals {
                    primal: f64::NAN,
                    dual: f64::NAN,
                    complementarity: f64::NAN,
                },
            });
        }
        drive_out_artificials(&mut tableau);
    }

    // Phase 2: rebuild the reduced-cost row for the real objective.
    for j in 0..=tableau.n_cols {
        tableau.cost[j] = S::zero();
    }
    for (j, c) in objective.iter().enumerate() {
        tableau.cost[j] = c.clone();
    }
    for i in 0..tableau.rows.len() {
        let b = tableau.basis[i];
        let c_b = if b < n {
            objective[b].clone()
        } else {
            S::zero()
        };
        if c_b != S::zero() {
            for j in 0..=tableau.n_cols {
                let delta = c_b.clone() * tableau.rows[i][j].clone();
                tableau.cost[j] = tableau.cost[j].clone() - delta;
            }
        }
    }
    tableau.optimize(first_artificial, max_iterations)?;

    let x: Vec<S> = (0..n).map(|j| tableau.value_of(j)).collect();
    let internal_value = -tableau.cost[n_cols].clone();
    let objective_value = sense_factor * internal_value;

    let mut duals = vec![S::zero(); m];
    for (i, &origin) in tableau.row_origin.iter().enumerate() {
        duals[origin] = -tableau.cost[tableau.record_col[i]].clone();
    }

    let residuals = compute_residuals(problem, &x, &tableau);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: Some(objective_value),
        x,
        duals,
        iterations: tableau.iterations,
        residuals,
    })
}

/// After phase 1, pivot every basic artificial out on a structural or slack
/// column, or drop its row as redundant.
fn drive_out_artificials<S: LpScalar>(tableau: &mut Tableau<S>) {
    let mut i = 0;
    while i < tableau.rows.len() {
        if tableau.basis[i] < tableau.first_artificial {
            i += 1;
            continue;
        }
        let col = (0..tableau.first_artificial)
            .find(|&j| tableau.rows[i][j].is_above_zero() || tableau.rows[i][j].is_below_zero());
        match col {
            Some(col) => {
                tableau.pivot(i, col);
                i += 1;
            }
            None => {
                // The row is a linear combination of the others.
                tableau.rows.remove(i);
                tableau.basis.remove(i);
                tableau.row_origin.remove(i);
                tableau.record_col.remove(i);
            }
        }
    }
}

fn compute_residuals<S: LpScalar>(
    problem: &LpProblem<S>,
    x: &[S],
    tableau: &Tableau<S>,
) -> LpResiduals {
    let xf: Vec<f64> = x.iter().map(|v| v.to_f64()).collect();
    let mut primal = xf.iter().fold(0.0f64, |acc, &v| acc.max(-v));
    for row in &problem.rows {
        let mut lhs = 0.0;
        for &(col, ref c) in &row.coeffs {
            lhs += c.to_f64() * xf[col];
        }
        let gap = lhs - row.rhs.to_f64();
        let violation = match row.relation {
            Relation::Eq => gap.abs(),
            Relation::Le => gap.max(0.0),
        };
        primal = primal.max(violation);
    }
    let mut dual = 0.0f64;
    let mut complementarity = 0.0f64;
    for j in 0..tableau.first_artificial {
        let rc = tableau.cost[j].to_f64();
        dual = dual.max(-rc);
        let xj = if j < tableau.n_structural {
            xf[j]
        } else {
            tableau.value_of(j).to_f64()
        };
        complementarity = complementarity.max((xj * rc).abs());
    }
    LpResiduals {
        primal,
        dual,
        complementarity,
    }
}

/// Renders the problem as a plain-text matrix for external verification.
pub fn dump_problem(problem: &LpProblem<f64>) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let sense = match problem.sense {
        Sense::Min => "minimize",
        Sense::Max => "maximize",
    };
    writeln!(out, "{sense} over {} nonnegative variables", problem.n_vars).unwrap();
    let mut obj = vec![0.0; problem.n_vars];
    for &(col, c) in &problem.objective {
        obj[col] += c;
    }
    writeln!(
        out,
        "objective: {}",
        obj.iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();
    for row in &problem.rows {
        let mut dense = vec![0.0; problem.n_vars];
        for &(col, c) in &row.coeffs {
            dense[col] += c;
        }
        let rel = match row.relation {
            Relation::Eq => "=",
            Relation::Le => "<=",
        };
        writeln!(
            out,
            "{} {rel} {}",
            dense
                .iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(" "),
            row.rhs
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, f64)], relation: Relation, rhs: f64) -> LpRow<f64> {
        LpRow {
            coeffs: coeffs.to_vec(),
            relation,
            rhs,
        }
    }

    #[test]
    fn maximizes_over_a_simplex() {
        let problem = LpProblem {
            n_vars: 2,
            sense: Sense::Max,
            objective: vec![(0, 1.0), (1, 1.0)],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], Relation::Le, 1.0)],
        };
        let solution = solve(&problem, 100).unwrap();
        assert_eq!(solution.status, LpStatus::Optimal);
        assert!((solution.objective.unwrap() - 1.0).abs() < 1e-12);
        assert!(solution.residuals.primal < 1e-12);
        assert!(solution.residuals.dual < 1e-12);
        assert!(solution.residuals.complementarity < 1e-12);
    }

    #[test]
    fn handles_mixed_relations_and_negative_rhs() {
        // min x + 2y  s.t.  x − y = −1,  x + y ≤ 3  → x=0, y=1.
        let problem = LpProblem {
            n_vars: 2,
            sense: Sense::Min,
            objective: vec![(0, 1.0), (1, 2.0)],
            rows: vec![
                row(&[(0, 1.0), (1, -1.0)], Relation::Eq, -1.0),
                row(&[(0, 1.0), (1, 1.0)], Relation::Le, 3.0),
            ],
        };
        let solution = solve(&problem, 100).unwrap();
        assert!((solution.objective.unwrap() - 2.0).abs() < 1e-12);
        assert!((solution.x[0] - 0.0).abs() < 1e-12);
        assert!((solution.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_infeasibility() {
        // x + y = −1 with x, y ≥ 0 is impossible.
        let problem = LpProblem {
            n_vars: 2,
            sense: Sense::Min,
            objective: vec![(0, 1.0)],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], Relation::Eq, -1.0)],
        };
        let solution = solve(&problem, 100).unwrap();
        assert_eq!(solution.status, LpStatus::Infeasible);
        assert!(solution.objective.is_none());
    }

    #[test]
    fn blands_rule_survives_the_classic_degenerate_example() {
        // Beale's cycling example; optimum −1/20.
        let problem = LpProblem {
            n_vars: 4,
            sense: Sense::Min,
            objective: vec![(0, -0.75), (1, 150.0), (2, -0.02), (3, 6.0)],
            rows: vec![
                row(
                    &[(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)],
                    Relation::Le,
                    0.0,
                ),
                row(
                    &[(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)],
                    Relation::Le,
                    0.0,
                ),
                row(&[(2, 1.0)], Relation::Le, 1.0),
            ],
        };
        let solution = solve(&problem, 100).unwrap();
        assert!((solution.objective.unwrap() + 0.05).abs() < 1e-9);
    }

    #[test]
    fn redundant_rows_are_dropped_not_fatal() {
        let problem = LpProblem {
            n_vars: 2,
            sense: Sense::Min,
            objective: vec![(0, 1.0)],
            rows: vec![
                row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0),
                row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0),
                row(&[(0, 2.0), (1, 2.0)], Relation::Eq, 2.0),
            ],
        };
        let solution = solve(&problem, 100).unwrap();
        assert_eq!(solution.status, LpStatus::Optimal);
        assert!(solution.objective.unwrap().abs() < 1e-12);
        assert!(solution.residuals.primal < 1e-12);
    }

    #[test]
    fn exact_rational_mode_certifies_boundary_values() {
        let half = BigRational::from_ratio(1, 2);
        let third = BigRational::from_ratio(1, 3);
        // min x  s.t.  x + y = 1/3,  x ≤ 1/2  → exactly 0.
        let problem = LpProblem {
            n_vars: 2,
            sense: Sense::Min,
            objective: vec![(0, BigRational::one())],
            rows: vec![
                LpRow {
                    coeffs: vec![(0, BigRational::one()), (1, BigRational::one())],
                    relation: Relation::Eq,
                    rhs: third.clone(),
                },
                LpRow {
                    coeffs: vec![(0, BigRational::one())],
                    relation: Relation::Le,
                    rhs: half,
                },
            ],
        };
        let solution = solve(&problem, 100).unwrap();
        assert_eq!(solution.status, LpStatus::Optimal);
        assert!(solution.objective.unwrap().is_zero());
        assert_eq!(solution.x[1], third);
    }

    #[test]
    fn duals_satisfy_strong_duality_on_a_textbook_problem() {
        // max 3x + 5y  s.t.  x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36.
        let problem = LpProblem {
            n_vars: 2,
            sense: Sense::Max,
            objective: vec![(0, 3.0), (1, 5.0)],
            rows: vec![
                row(&[(0, 1.0)], Relation::Le, 4.0),
                row(&[(1, 2.0)], Relation::Le, 12.0),
                row(&[(0, 3.0), (1, 2.0)], Relation::Le, 18.0),
            ],
        };
        let solution = solve(&problem, 100).unwrap();
        assert!((solution.objective.unwrap() - 36.0).abs() < 1e-9);
        // Internal form minimizes −3x−5y; y'b equals its optimum −36.
        let dual_value: f64 = solution
            .duals
            .iter()
            .zip(&problem.rows)
            .map(|(y, r)| y * r.rhs)
            .sum();
        assert!((dual_value + 36.0).abs() < 1e-9);
    }

    #[test]
    fn column_cap_is_enforced() {
        let problem: LpProblem<f64> = LpProblem {
            n_vars: 50,
            sense: Sense::Min,
            objective: vec![],
            rows: vec![],
        };
        assert!(matches!(
            solve(&problem, 10),
            Err(CoreError::LpTooLarge {
                needed: 50,
                cap: 10
            })
        ));
    }

    #[test]
    fn unbounded_problems_error_out() {
        let problem = LpProblem {
            n_vars: 1,
            sense: Sense::Max,
            objective: vec![(0, 1.0)],
            rows: vec![],
        };
        assert!(matches!(
            solve(&problem, 10),
            Err(CoreError::LpNumerical(_))
        ));
    }

    #[test]
    fn dump_is_a_readable_matrix() {
        let problem = LpProblem {
            n_vars: 2,
            sense: Sense::Min,
            objective: vec![(0, 1.0)],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0)],
        };
        let text = dump_problem(&problem);
        assert!(text.contains("minimize over 2 nonnegative variables"));
        assert!(text.contains("1 1 = 1"));
    }
}
