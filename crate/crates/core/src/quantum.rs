//! GHZ-state quantum behaviors under phase-graded Fourier bases.
//!
//! The state is `|Ψ⟩ = (1/√d) Σ_q |q…q⟩`.  Party `p` measures, for setting
//! `m`, the basis whose eigenstates are
//! `|r⟩ = (1/√d) Σ_q exp(sign_p · (2πi/d) · q · (r − φ_p(m))) |q⟩`
//! with `sign_p = (-1)^p` and phase offsets (as fractions of a setting step)
//!
//! * party 0: `φ = (m - 1/2) / M` — half-step grid,
//! * party 1: `φ = m / M` — full-step grid,
//! * parties 2..N: `φ = (m - 1) / M` — full-step grid starting at zero.
//!
//! These offsets interleave so that every term of the chained functional
//! sees a total phase of exactly `-1/(2M)`, which makes the value
//! independent of the party count and equal to
//! `2M/d² · Σ_{w=1}^{d-1} w · sin²(π/(2M)) / sin²(π(w + 1/(2M))/d)`.
//!
//! Joint probabilities are computed two ways: an explicit `d`-term
//! state-vector amplitude sum (the oracle) and a closed-form geometric-sum
//! expression; construction verifies the two agree and that term
//! distributions have the expected geometric shape.

use num_complex::Complex64;
use serde::Serialize;

use crate::behavior::BehaviorTable;
use crate::error::{CoreError, Result};
use crate::functional::BellFunctional;
use crate::scenario::Scenario;
use crate::tol;

/// Which setting tuples a generated quantum table covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumSupport {
    FullGrid,
    /// Only the `2·M^(N-1)` tuples the functional touches.
    InequalityBases,
}

/// GHZ state plus per-party measurement conventions for one scenario.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    scenario: Scenario,
}

impl QuantumModel {
    /// Builds the model and verifies the measurement conventions: the
    /// distribution of each functional term's modular combination must match
    /// the geometric-sum shape with total phase `-1/(2M)` (checked on the
    /// first forward and the last backward term, computed from the direct
    /// state-vector path).
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let model = QuantumModel {
            scenario: *scenario,
        };
        model.verify_conventions()?;
        Ok(model)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Phase sign of party `p` in the measurement exponent.
    fn sign(p: usize) -> i64 {
        if p % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Phase offset of party `p` at `setting`, as an integer numerator over
    /// the common denominator `2M`.
    fn phase_numerator(&self, party: usize, setting: u8) -> i64 {
        let m = setting as i64;
        match party {
            0 => 2 * m - 1,
            1 => 2 * m,
            _ => 2 * m - 2,
        }
    }

    /// Joint probability via the closed-form geometric sum.
    ///
    /// The amplitude is `d^{-(N+1)/2} Σ_q e^{-iθq}` with
    /// `θ = (2π/d)(Σ_p sign_p r_p - Σ_p sign_p φ_p)`; writing `θ` over the
    /// exact common denominator `2Md` reduces the probability to a ratio of
    /// two sines and makes the resonant branch (`θ ≡ 0 mod 2π`, value `d²`)
    /// an exact integer test.
    pub fn joint_probability(&self, settings: &[u8], outcomes: &[u8]) -> Result<f64> {
        self.check_tuples(settings, outcomes)?;
        let n = self.scenario.n_parties();
        let m = self.scenario.n_settings() as i64;
        let d = self.scenario.n_outcomes() as i64;
        let mut numerator: i64 = 0; // A = 2M·Σ sign·r − Σ sign·q_num
        for p in 0..n {
            let s = Self::sign(p);
            numerator += s * (2 * m * outcomes[p] as i64 - self.phase_numerator(p, settings[p]));
        }
        let modulus = 2 * m * d;
        let a = numerator.rem_euclid(modulus);
        let norm = (d as f64).powi(-(n as i32 + 1));
        if a == 0 {
            return Ok(norm * (d * d) as f64);
        }
        let half_theta_d = std::f64::consts::PI * a as f64 / (2.0 * m as f64);
        let half_theta = std::f64::consts::PI * a as f64 / modulus as f64;
        let num = half_theta_d.sin().powi(2);
        let den = half_theta.sin().powi(2);
        Ok(norm * num / den)
    }

    /// Joint probability via the explicit state-vector amplitude sum; this
    /// is the oracle the closed form is checked against.
    pub fn joint_probability_direct(&self, settings: &[u8], outcomes: &[u8]) -> Result<f64> {
        self.check_tuples(settings, outcomes)?;
        let n = self.scenario.n_parties();
        let m = self.scenario.n_settings() as i64;
        let d = self.scenario.n_outcomes() as i64;
        let modulus = 2 * m * d;
        let coeff_mag = 1.0 / (d as f64).sqrt();
        let mut amplitude = Complex64::new(0.0, 0.0);
        for q in 0..d {
            // ⟨r_p | q⟩ for each party, times the GHZ coefficient 1/√d.
            let mut product = Complex64::new(coeff_mag, 0.0);
            for p in 0..n {
                let numerator = (Self::sign(p)
                    * q
                    * (2 * m * outcomes[p] as i64 - self.phase_numerator(p, settings[p])))
                .rem_euclid(modulus);
                let angle = -2.0 * std::f64::consts::PI * numerator as f64 / modulus as f64;
                product *= Complex64::from_polar(coeff_mag, angle);
            }
            amplitude += product;
        }
        Ok(amplitude.norm_sqr())
    }

    fn check_tuples(&self, settings: &[u8], outcomes: &[u8]) -> Result<()> {
        self.scenario.setting_index(settings)?;
        self.scenario.outcome_index(outcomes)?;
        Ok(())
    }

    /// The full behavior table for this model.
    pub fn behavior(&self, support: QuantumSupport) -> Result<BehaviorTable> {
        match support {
            QuantumSupport::FullGrid => BehaviorTable::from_fn_full(
                &self.scenario,
                |s, r| {
                    self.joint_probability(s, r)
                        .expect("tuples from the scenario are valid")
                },
                tol::NORMALIZATION,
            ),
            QuantumSupport::InequalityBases => {
                let functional = BellFunctional::build(&self.scenario)?;
                let mut entries = Vec::new();
                for basis in functional.inequality_bases() {
                    for r in self.scenario.outcome_tuples() {
                        let p = self.joint_probability(&basis, &r)?;
                        if p > 0.0 {
                            entries.push((basis.to_vec(), r.to_vec(), p));
                        }
                    }
                }
                BehaviorTable::from_entries(&self.scenario, &entries, tol::NORMALIZATION)
            }
        }
    }

    /// The functional value of this model, evaluated over the inequality
    /// bases.
    pub fn bell_value(&self, functional: &BellFunctional) -> Result<f64> {
        functional.evaluate(&self.behavior(QuantumSupport::InequalityBases)?)
    }

    /// Verifies the measurement conventions against the direct state-vector
    /// path: term distributions must match the geometric shape
    /// `P([W]=w) = sin²(π/(2M)) / sin²(π(2Mw+1)/(2Md)) / d²`.
    fn verify_conventions(&self) -> Result<()> {
        let functional = BellFunctional::build(&self.scenario)?;
        let m = self.scenario.n_settings();
        let d = self.scenario.n_outcomes();
        let probes = [
            &functional.terms()[0],
            &functional.terms()[functional.terms().len() - 1],
        ];
        for term in probes {
            let settings = term.settings(m);
            let mut dist = vec![0.0f64; d as usize];
            for r in self.scenario.outcome_tuples() {
                let w = term.outcome_weight(&r, m, d) as usize;
                dist[w] += self.joint_probability_direct(&settings, &r)?;
            }
            for (w, &p) in dist.iter().enumerate() {
                let expected = term_weight_probability(m, d, w as u8);
                if (p - expected).abs() > tol::IDENTITY {
                    return Err(CoreError::InvalidInput(format!(
                        "measurement conventions broken: P([W]={w}) = {p}, expected {expected} \
                         at N={}, M={m}, d={d}",
                        self.scenario.n_parties()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Probability that a functional term's modular combination equals `w`
/// under the GHZ model: the geometric-sum shape with total phase `-1/(2M)`.
/// Independent of the party count.
pub fn term_weight_probability(m: u8, d: u8, w: u8) -> f64 {
    let m = m as f64;
    let d_f = d as f64;
    let numerator = (std::f64::consts::PI / (2.0 * m)).sin().powi(2);
    let denominator = (std::f64::consts::PI * (w as f64 + 1.0 / (2.0 * m)) / d_f)
        .sin()
        .powi(2);
    numerator / denominator / (d_f * d_f)
}

/// Large-`M` approximation of the quantum value,
/// `π²/(4d²M) · Σ_{i=1}^{d-1} i / sin²(πi/d)`.
pub fn large_m_approximation(m: u8, d: u8) -> f64 {
    let d_f = d as f64;
    let sum: f64 = (1..d)
        .map(|i| i as f64 / (std::f64::consts::PI * i as f64 / d_f).sin().powi(2))
        .sum();
    std::f64::consts::PI.powi(2) / (4.0 * d_f * d_f * m as f64) * sum
}

/// One row of the convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub m: u8,
    pub exact: f64,
    pub approximation: f64,
    /// exact / approximation; converges to a constant that is reported, not
    /// asserted.
    pub ratio: f64,
}

/// Scenario for closed-form scans.  No probability table is ever built on
/// this path, so the dense-grid cap does not apply; the working size is the
/// term count `2·M^(N-1)`, which is guarded instead.
fn scan_scenario(n: usize, m: u8, d: u8) -> Result<Scenario> {
    let terms = (m as u128)
        .checked_pow(n.saturating_sub(1) as u32)
        .and_then(|t| t.checked_mul(2))
        .ok_or(CoreError::EnumerationTooLarge {
            needed: u128::MAX,
            cap: tol::DEFAULT_ENUM_CAP,
        })?;
    if terms > tol::DEFAULT_ENUM_CAP {
        return Err(CoreError::EnumerationTooLarge {
            needed: terms,
            cap: tol::DEFAULT_ENUM_CAP,
        });
    }
    Scenario::with_cell_cap(n, m, d, u128::MAX)
}

/// Exact quantum values against the large-`M` approximation over a list of
/// setting counts.
pub fn convergence_table(n: usize, d: u8, m_list: &[u8]) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let scenario = scan_scenario(n, m, d)?;
        let functional = BellFunctional::build(&scenario)?;
        let model = QuantumModel::new(&scenario)?;
        let exact = model.bell_value(&functional)?;
        let approximation = large_m_approximation(m, d);
        rows.push(ConvergenceRow {
            m,
            exact,
            approximation,
            ratio: exact / approximation,
        });
    }
    Ok(rows)
}

/// Largest deviation of the quantum value from the two-party value at the
/// same `M` and `d`, over a list of party counts.
pub fn value_spread_across_parties(d: u8, m: u8, n_list: &[usize]) -> Result<f64> {
    let reference = {
        let scenario = scan_scenario(2, m, d)?;
        let functional = BellFunctional::build(&scenario)?;
        QuantumModel::new(&scenario)?.bell_value(&functional)?
    };
    let mut spread = 0.0f64;
    for &n in n_list {
        let scenario = scan_scenario(n, m, d)?;
        let functional = BellFunctional::build(&scenario)?;
        let value = QuantumModel::new(&scenario)?.bell_value(&functional)?;
        spread = spread.max((value - reference).abs());
    }
    Ok(spread)
}

/// Least-squares slope and intercept of `ln(value)` against `ln(m)`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(CoreError::InvalidInput(
            "log-log fit needs at least two positive points".into(),
        ));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept))
}
