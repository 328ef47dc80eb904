//! `svetlichny-lab`: command-line front door for the chained-inequality
//! laboratory.
//!
//! Every invocation prints one JSON report to stdout: the schema tag
//! `svetlichny-lab/1`, the fully resolved run configuration, wall-clock
//! seconds, a top-level `pass` flag, and the subcommand's result.  Reports
//! from identical configurations are byte-identical apart from the `seconds`
//! field.  Exit codes: 0 = success, 1 = a check failed or the computation
//! errored, 2 = usage error.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use svetlichny_core::{
    checks, classical, functional, lp, nsopt, quantum, sharing, tol, BehaviorTable, BellFunctional,
    CoreError, Scenario, TermKind,
};

const SCHEMA: &str = "svetlichny-lab/1";

/// Laboratory for chained multipartite Svetlichny Bell inequalities:
/// deterministic bounds by enumeration, quantum values in closed form,
/// nonsignaling-polytope linear programs, checker batteries, and a seeded
/// secret-sharing simulation.
#[derive(Parser)]
#[command(name = "svetlichny-lab", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for parallel enumeration and simulation (0 = one per
    /// core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Also write the subcommand's tabular artifact to this CSV file.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Cap on probability-table cells, (M*d)^N [env: SVETLICHNY_CELL_CAP].
    #[arg(long, global = true, value_name = "N")]
    cell_cap: Option<u128>,

    /// Cap on exhaustively enumerated strategy evaluations
    /// [env: SVETLICHNY_ENUM_CAP].
    #[arg(long, global = true, value_name = "N")]
    enum_cap: Option<u128>,

    /// Cap on linear-program columns [env: SVETLICHNY_LP_COLUMN_CAP].
    #[arg(long, global = true, value_name = "N")]
    lp_column_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the functional's term table (artifact: one CSV row per term
    /// variable).
    Terms(TermsArgs),
    /// Exact GHZ value next to its large-M closed form over a list of
    /// setting counts.
    Quantum(QuantumArgs),
    /// Exhaustive deterministic minimum certifying the local or bilocal
    /// bound.
    Bound(BoundArgs),
    /// Linear programs over the nonsignaling polytope.
    Ns(NsArgs),
    /// Run the full checker battery on a behavior file.
    Verify(VerifyArgs),
    /// Simulate the dit-sharing protocol on a seeded source.
    Share(ShareArgs),
    /// Power-law fit of the quantum value against the setting count.
    Asymptotics(AsymptoticsArgs),
}

#[derive(Args, Serialize)]
struct ScenarioArgs {
    /// Number of parties N.
    #[arg(long)]
    n: usize,
    /// Settings per party M.
    #[arg(long)]
    m: u8,
    /// Outcomes per measurement d.
    #[arg(long)]
    d: u8,
}

#[derive(Args, Serialize)]
struct TermsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Args, Serialize)]
struct QuantumArgs {
    /// Number of parties N.
    #[arg(long)]
    n: usize,
    /// Outcomes per measurement d.
    #[arg(long)]
    d: u8,
    /// Comma-separated setting counts to tabulate.
    #[arg(long = "m-list", value_delimiter = ',', required = true)]
    m_list: Vec<u8>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModelKind {
    /// Every party answers independently.
    Local,
    /// One bipartition answers jointly on each side.
    Bilocal,
}

#[derive(Args, Serialize)]
struct BoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    scenario: ScenarioArgs,
    /// Model class to minimize over.
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Restrict the bilocal search to the bipartition whose first group is
    /// this comma-separated party list (must contain party 0).
    #[arg(long, value_delimiter = ',', value_name = "PARTIES")]
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<Vec<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum NsTask {
    /// Minimize the functional over the polytope.
    MinBell,
    /// Probe the marginal-probability bound over an epsilon grid.
    Theorem1,
    /// Eavesdropper guessing probability against the ideal box.
    Monogamy,
    /// Rank analysis: do zero value plus uniform marginals pin one basis?
    Uniqueness,
}

#[derive(Args, Serialize)]
struct NsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    scenario: ScenarioArgs,
    /// Which polytope program to run.
    #[arg(long, value_enum)]
    task: NsTask,
    /// Comma-separated violation budgets for the theorem1 scan.
    #[arg(long = "eps-list", value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_list: Option<Vec<f64>>,
    /// Parties whose joint marginal is probed (theorem1; default: all but
    /// the last).
    #[arg(long, value_delimiter = ',', value_name = "PARTIES")]
    #[serde(skip_serializing_if = "Option::is_none")]
    subset: Option<Vec<usize>>,
    /// Inequality basis to work at, as a comma-separated setting tuple
    /// (default: the functional's first basis).
    #[arg(long, value_delimiter = ',', value_name = "SETTINGS")]
    #[serde(skip_serializing_if = "Option::is_none")]
    basis: Option<Vec<u8>>,
    /// Target outcomes on the probed subset (theorem1; default: all zeros).
    #[arg(long, value_delimiter = ',', value_name = "OUTCOMES")]
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<Vec<u8>>,
    /// Party whose outcome the eavesdropper guesses (monogamy).
    #[arg(long, default_value_t = 0)]
    target_party: usize,
    /// Also certify the minimum in exact rational arithmetic (min-bell).
    #[arg(long)]
    exact: bool,
    /// Drop the uniform-marginal equations from the uniqueness system.
    #[arg(long)]
    without_marginals: bool,
    /// Write the LP in a plain-text matrix format to this path (min-bell).
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    dump_lp: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// Behavior JSON file to check.
    #[arg(long, value_name = "FILE")]
    behavior: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SourceKind {
    /// GHZ state with the chained measurement conventions.
    Quantum,
    /// The exact zero-value box, defined on the inequality bases.
    IdealBox,
    /// A behavior loaded from --behavior FILE.
    File,
}

#[derive(Args, Serialize)]
struct ShareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    scenario: ScenarioArgs,
    /// Number of measurement rounds.
    #[arg(long)]
    rounds: u64,
    /// RNG seed; identical seeds reproduce the transcript byte-for-byte.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Correlation source the parties share.
    #[arg(long, value_enum)]
    source: SourceKind,
    /// Behavior JSON file (required with --source file).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    behavior: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct AsymptoticsArgs {
    /// Number of parties N.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Outcomes per measurement d.
    #[arg(long, default_value_t = 2)]
    d: u8,
    /// Comma-separated setting counts for the fit.
    #[arg(
        long = "m-list",
        value_delimiter = ',',
        default_value = "8,16,32,64,128"
    )]
    m_list: Vec<u8>,
}

/// Resolved resource caps: command-line flag, else environment variable,
/// else the library default.
#[derive(Serialize)]
struct Caps {
    cell: u128,
    enumeration: u128,
    lp_columns: usize,
}

fn resolve_cap<T: FromStr + Copy>(flag: Option<T>, var: &str, default: T) -> Result<T, String> {
    if let Some(value) = flag {
        return Ok(value);
    }
    match std::env::var(var) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| format!("{var}={text:?} is not a valid number")),
        Err(_) => Ok(default),
    }
}

fn resolve_caps(cli: &Cli) -> Result<Caps, String> {
    Ok(Caps {
        cell: resolve_cap(cli.cell_cap, "SVETLICHNY_CELL_CAP", tol::DEFAULT_CELL_CAP)?,
        enumeration: resolve_cap(cli.enum_cap, "SVETLICHNY_ENUM_CAP", tol::DEFAULT_ENUM_CAP)?,
        lp_columns: resolve_cap(
            cli.lp_column_cap,
            "SVETLICHNY_LP_COLUMN_CAP",
            tol::DEFAULT_LP_COLUMN_CAP,
        )?,
    })
}

struct CommandOutput {
    result: Value,
    pass: bool,
}

/// One named claim in a report, with the tolerance it was asserted under
/// (`null` = exact arithmetic).
fn check(name: &str, pass: bool, tolerance: Option<f64>, observed: Value) -> Value {
    json!({ "name": name, "pass": pass, "tolerance": tolerance, "observed": observed })
}

fn all_pass(checks: &[Value]) -> bool {
    checks.iter().all(|c| c["pass"] == Value::Bool(true))
}

fn write_text(path: &Path, text: &str) -> Result<(), CoreError> {
    fs::write(path, text)
        .map_err(|e| CoreError::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CoreError> {
    let mut text = String::with_capacity(header.len() + 1 + rows.len() * 24);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_text(path, &text)
}

fn read_behavior(path: &Path) -> Result<BehaviorTable, CoreError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CoreError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    BehaviorTable::from_json(&text, tol::NORMALIZATION)
}

fn join<T: std::fmt::Display>(items: &[T], separator: &str) -> String {
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(separator);
        }
        let _ = write!(out, "{item}");
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let caps = match resolve_caps(&cli) {
        Ok(caps) => caps,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = svetlichny_core::configure_threads(cli.threads) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    let config = run_config(&cli, &caps);
    let started = Instant::now();
    let outcome = dispatch(&cli, &caps);
    let seconds = started.elapsed().as_secs_f64();

    let (report, code) = match outcome {
        Ok(output) => (
            json!({
                "schema": SCHEMA,
                "config": config,
                "seconds": seconds,
                "pass": output.pass,
                "result": output.result,
            }),
            if output.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            },
        ),
        Err(e) => (
            json!({
                "schema": SCHEMA,
                "config": config,
                "seconds": seconds,
                "pass": false,
                "error": e.to_string(),
            }),
            ExitCode::from(1),
        ),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    let mut stdout = io::stdout().lock();
    if let Err(e) = writeln!(stdout, "{text}") {
        // A closed pipe downstream (e.g. `| head`) is not our failure.
        if e.kind() == io::ErrorKind::BrokenPipe {
            return code;
        }
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    code
}

fn run_config(cli: &Cli, caps: &Caps) -> Value {
    let (subcommand, params) = match &cli.command {
        Command::Terms(a) => ("terms", serde_json::to_value(a)),
        Command::Quantum(a) => ("quantum", serde_json::to_value(a)),
        Command::Bound(a) => ("bound", serde_json::to_value(a)),
        Command::Ns(a) => ("ns", serde_json::to_value(a)),
        Command::Verify(a) => ("verify", serde_json::to_value(a)),
        Command::Share(a) => ("share", serde_json::to_value(a)),
        Command::Asymptotics(a) => ("asymptotics", serde_json::to_value(a)),
    };
    json!({
        "subcommand": subcommand,
        "params": params.expect("arguments serialize"),
        "threads": cli.threads,
        "csv": cli.csv,
        "caps": caps,
    })
}

fn dispatch(cli: &Cli, caps: &Caps) -> Result<CommandOutput, CoreError> {
    let csv = cli.csv.as_deref();
    match &cli.command {
        Command::Terms(args) => cmd_terms(args, csv, caps),
        Command::Quantum(args) => cmd_quantum(args, csv),
        Command::Bound(args) => cmd_bound(args, caps),
        Command::Ns(args) => cmd_ns(args, caps),
        Command::Verify(args) => cmd_verify(args),
        Command::Share(args) => cmd_share(args, csv, caps),
        Command::Asymptotics(args) => cmd_asymptotics(args, csv),
    }
}

fn build_functional(scenario: &ScenarioArgs, caps: &Caps) -> Result<BellFunctional, CoreError> {
    let scenario = Scenario::with_cell_cap(scenario.n, scenario.m, scenario.d, caps.cell)?;
    BellFunctional::build(&scenario)
}

fn cmd_terms(
    args: &TermsArgs,
    csv: Option<&Path>,
    caps: &Caps,
) -> Result<CommandOutput, CoreError> {
    let f = build_functional(&args.scenario, caps)?;
    let scenario = *f.scenario();
    let m = scenario.n_settings();

    let mut csv_rows = Vec::new();
    let mut terms = Vec::with_capacity(f.terms().len());
    for term in f.terms() {
        let sigma = join(&term.sigma, "-");
        let kind = match term.kind {
            TermKind::Forward => "forward",
            TermKind::Backward => "backward",
        };
        for v in &term.variables {
            csv_rows.push(format!(
                "{kind},{sigma},{},{},{},{}",
                v.party,
                v.effective_setting(m),
                v.outcome_offset(m),
                v.sign
            ));
        }
        terms.push(json!({
            "kind": term.kind,
            "sigma": term.sigma,
            "settings": term.settings(m).0,
            "offsets": term.offsets(m),
            "signs": term.variables.iter().map(|v| v.sign).collect::<Vec<_>>(),
        }));
    }
    if let Some(path) = csv {
        write_csv(path, "kind,sigma,party,setting,offset,sign", &csv_rows)?;
    }

    let expected_terms = 2 * (scenario.n_settings() as usize).pow(scenario.n_parties() as u32 - 1);
    let checks = vec![
        check(
            "term-count",
            f.terms().len() == expected_terms,
            None,
            json!({ "terms": f.terms().len(), "expected": expected_terms }),
        ),
        check(
            "bases-distinct",
            f.inequality_bases().len() == f.terms().len(),
            None,
            json!({ "bases": f.inequality_bases().len() }),
        ),
    ];
    let pass = all_pass(&checks);
    Ok(CommandOutput {
        result: json!({
            "scenario": scenario,
            "regularization": f.regularization(),
            "bilocal_bound": f.bilocal_bound(),
            "n_terms": f.terms().len(),
            "terms": terms,
            "checks": checks,
        }),
        pass,
    })
}

fn cmd_quantum(args: &QuantumArgs, csv: Option<&Path>) -> Result<CommandOutput, CoreError> {
    let rows = quantum::convergence_table(args.n, args.d, &args.m_list)?;

    if let Some(path) = csv {
        let csv_rows: Vec<String> = rows
            .iter()
            .map(|r| format!("{},{},{},{}", r.m, r.exact, r.approximation, r.ratio))
            .collect();
        write_csv(path, "m,exact,approximation,ratio", &csv_rows)?;
    }

    let mut ordered: Vec<&quantum::ConvergenceRow> = rows.iter().collect();
    ordered.sort_by_key(|r| r.m);
    let strictly_decreasing = ordered.windows(2).all(|w| w[0].exact > w[1].exact);
    let bound = (args.d - 1) as f64;
    let below_bound = rows.iter().all(|r| r.exact < bound);

    let checks = vec![
        check(
            "exact-strictly-decreasing-in-m",
            strictly_decreasing,
            None,
            json!({ "comparison": "strict, ordered by m" }),
        ),
        check(
            "exact-below-deterministic-bound",
            below_bound,
            None,
            json!({ "bound": bound }),
        ),
    ];
    let pass = all_pass(&checks);
    Ok(CommandOutput {
        result: json!({ "rows": rows, "checks": checks }),
        pass,
    })
}

fn cmd_bound(args: &BoundArgs, caps: &Caps) -> Result<CommandOutput, CoreError> {
    let f = build_functional(&args.scenario, caps)?;
    if args.model == ModelKind::Local && args.group.is_some() {
        return Err(CoreError::InvalidInput(
            "--group only restricts the bilocal search".into(),
        ));
    }
    let result = match (args.model, &args.group) {
        (ModelKind::Local, _) => {
            let minimum = classical::min_local(&f, caps.enumeration)?;
            json!({
                "model": "local",
                "minimum": minimum.minimum,
                "weight_total": minimum.weight_total,
                "witness": minimum.witness,
                "witness_counter": minimum.witness_counter,
                "evaluations": minimum.evaluations,
                "deterministic_bound": f.bilocal_bound(),
                "arithmetic": "exact integer term weights",
            })
        }
        (ModelKind::Bilocal, Some(group)) => {
            let minimum = classical::min_bipartition(&f, group, caps.enumeration)?;
            json!({
                "model": "bilocal",
                "minimum": minimum.minimum,
                "weight_total": minimum.weight_total,
                "group_a": minimum.group_a,
                "group_b": minimum.group_b,
                "witness": minimum.witness,
                "evaluations": minimum.evaluations,
                "deterministic_bound": f.bilocal_bound(),
                "arithmetic": "exact integer term weights",
            })
        }
        (ModelKind::Bilocal, None) => {
            let minimum = classical::min_bilocal(&f, caps.enumeration)?;
            json!({
                "model": "bilocal",
                "minimum": minimum.minimum,
                "weight_total": minimum.weight_total,
                "witness_bipartition": minimum.witness_bipartition,
                "per_bipartition": minimum.per_bipartition,
                "evaluations": minimum.evaluations,
                "deterministic_bound": f.bilocal_bound(),
                "arithmetic": "exact integer term weights",
            })
        }
    };
    Ok(CommandOutput { result, pass: true })
}

fn default_basis(f: &BellFunctional, requested: &Option<Vec<u8>>) -> Result<Vec<u8>, CoreError> {
    match requested {
        Some(basis) => Ok(basis.clone()),
        None => Ok(f
            .inequality_bases()
            .first()
            .ok_or_else(|| CoreError::InvalidInput("functional has no bases".into()))?
            .0
            .clone()),
    }
}

fn cmd_ns(args: &NsArgs, caps: &Caps) -> Result<CommandOutput, CoreError> {
    let f = build_functional(&args.scenario, caps)?;
    let scenario = *f.scenario();
    let n = scenario.n_parties();
    let d = scenario.n_outcomes() as f64;

    if args.exact && args.task != NsTask::MinBell {
        return Err(CoreError::InvalidInput(
            "--exact applies to --task min-bell".into(),
        ));
    }
    if args.dump_lp.is_some() && args.task != NsTask::MinBell {
        return Err(CoreError::InvalidInput(
            "--dump-lp applies to --task min-bell".into(),
        ));
    }
    if args.without_marginals && args.task != NsTask::Uniqueness {
        return Err(CoreError::InvalidInput(
            "--without-marginals applies to --task uniqueness".into(),
        ));
    }
    if (args.eps_list.is_some() || args.subset.is_some() || args.target.is_some())
        && args.task != NsTask::Theorem1
    {
        return Err(CoreError::InvalidInput(
            "--eps-list, --subset and --target apply to --task theorem1".into(),
        ));
    }

    match args.task {
        NsTask::MinBell => {
            if let Some(path) = &args.dump_lp {
                write_text(path, &lp::dump_problem(&nsopt::min_bell_problem(&f)))?;
            }
            let (report, optimizer) = nsopt::min_bell_ns(&f, caps.lp_columns)?;
            let objective = report.objective.unwrap_or(f64::NAN);
            let mut checks = vec![check(
                "polytope-minimum-zero",
                objective.abs() <= tol::LP_FEASIBILITY,
                Some(tol::LP_FEASIBILITY),
                json!({ "objective": report.objective }),
            )];
            let mut exact = None;
            if args.exact {
                let polytope_minimum = nsopt::min_bell_ns_exact(&f)?;
                let ideal_box_value = nsopt::ideal_box_value_exact(&scenario)?;
                checks.push(check(
                    "exact-polytope-minimum-zero",
                    polytope_minimum.is_zero(),
                    None,
                    json!({ "value": polytope_minimum.to_string() }),
                ));
                checks.push(check(
                    "ideal-box-value-exactly-zero",
                    ideal_box_value.is_zero(),
                    None,
                    json!({ "value": ideal_box_value.to_string() }),
                ));
                exact = Some(json!({
                    "polytope_minimum": polytope_minimum.to_string(),
                    "ideal_box_value": ideal_box_value.to_string(),
                    "arithmetic": "rational simplex",
                }));
            }
            let pass = all_pass(&checks);
            Ok(CommandOutput {
                result: json!({
                    "task": "min-bell",
                    "status": report.status,
                    "objective": report.objective,
                    "iterations": report.iterations,
                    "residuals": report.residuals,
                    "optimizer_value": f.evaluate(&optimizer)?,
                    "exact": exact,
                    "checks": checks,
                }),
                pass,
            })
        }
        NsTask::Theorem1 => {
            let basis = default_basis(&f, &args.basis)?;
            let subset: Vec<usize> = match &args.subset {
                Some(subset) => subset.clone(),
                None => (0..n - 1).collect(),
            };
            let target: Vec<u8> = match &args.target {
                Some(target) => target.clone(),
                None => vec![0; subset.len()],
            };
            let epsilons = args
                .eps_list
                .clone()
                .unwrap_or_else(|| vec![0.0, 0.01, 0.05, 0.1]);
            let points = nsopt::marginal_bound_probe(
                &f,
                &subset,
                &basis,
                &target,
                &epsilons,
                caps.lp_columns,
            )?;
            let mut checks = vec![check(
                "lp-within-marginal-bound",
                points.iter().all(|p| p.within_bound),
                Some(tol::LP_OBJECTIVE),
                json!({ "points": points.len() }),
            )];
            if let Some(zero) = points.iter().find(|p| p.epsilon == 0.0) {
                let ideal = 1.0 / d.powi(n as i32 - 1);
                checks.push(check(
                    "zero-budget-attains-ideal-marginal",
                    (zero.lp_value - ideal).abs() <= tol::LP_OBJECTIVE,
                    Some(tol::LP_OBJECTIVE),
                    json!({ "lp_value": zero.lp_value, "ideal": ideal }),
                ));
            }
            let pass = all_pass(&checks);
            Ok(CommandOutput {
                result: json!({
                    "task": "theorem1",
                    "subset": subset,
                    "basis": basis,
                    "target": target,
                    "points": points,
                    "checks": checks,
                }),
                pass,
            })
        }
        NsTask::Monogamy => {
            let basis = default_basis(&f, &args.basis)?;
            let box_behavior = nsopt::ideal_box(&scenario)?;
            let report = nsopt::guessing_probability(
                &box_behavior,
                args.target_party,
                &basis,
                caps.lp_columns,
            )?;
            let guessing = report.objective.unwrap_or(f64::NAN);
            let expected = 1.0 / d;
            let checks = vec![check(
                "eavesdropper-limited-to-random-guessing",
                (guessing - expected).abs() <= tol::LP_OBJECTIVE,
                Some(tol::LP_OBJECTIVE),
                json!({ "guessing_probability": guessing, "expected": expected }),
            )];
            let pass = all_pass(&checks);
            Ok(CommandOutput {
                result: json!({
                    "task": "monogamy",
                    "target_party": args.target_party,
                    "basis": basis,
                    "status": report.status,
                    "guessing_probability": report.objective,
                    "expected": expected,
                    "iterations": report.iterations,
                    "residuals": report.residuals,
                    "checks": checks,
                }),
                pass,
            })
        }
        NsTask::Uniqueness => {
            let basis = default_basis(&f, &args.basis)?;
            let include_marginals = !args.without_marginals;
            let report = nsopt::uniqueness_check(&scenario, &basis, include_marginals)?;
            let checks = vec![if include_marginals {
                check(
                    "pinned-uniquely-to-ideal-box",
                    report.unique && report.matches_ideal_box == Some(true),
                    None,
                    json!({ "rank": report.rank, "unknowns": report.n_unknowns }),
                )
            } else {
                check(
                    "underdetermined-without-marginals",
                    !report.unique,
                    None,
                    json!({ "rank": report.rank, "unknowns": report.n_unknowns }),
                )
            }];
            let pass = all_pass(&checks);
            Ok(CommandOutput {
                result: json!({
                    "task": "uniqueness",
                    "include_marginals": include_marginals,
                    "report": report,
                    "arithmetic": "rational elimination",
                    "checks": checks,
                }),
                pass,
            })
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<CommandOutput, CoreError> {
    let mut checks: Vec<Value> = Vec::new();
    let file = args.behavior.display().to_string();

    let text = match fs::read_to_string(&args.behavior) {
        Ok(text) => text,
        Err(e) => {
            checks.push(check(
                "read-file",
                false,
                None,
                json!({ "error": e.to_string() }),
            ));
            return Ok(CommandOutput {
                result: json!({ "file": file, "checks": checks }),
                pass: false,
            });
        }
    };
    checks.push(check(
        "read-file",
        true,
        None,
        json!({ "bytes": text.len() }),
    ));

    let behavior = match BehaviorTable::from_json(&text, tol::NORMALIZATION) {
        Ok(behavior) => {
            checks.push(check("parse-json", true, None, Value::Null));
            checks.push(check(
                "normalization",
                true,
                Some(tol::NORMALIZATION),
                Value::Null,
            ));
            behavior
        }
        Err(e) => {
            let (name, tolerance) = match &e {
                CoreError::NotNormalized { .. } => ("normalization", Some(tol::NORMALIZATION)),
                CoreError::InvalidEntry { .. } => ("entry-range", Some(tol::NORMALIZATION)),
                CoreError::Serialization(_) => ("parse-json", None),
                _ => ("decode", None),
            };
            checks.push(check(
                name,
                false,
                tolerance,
                json!({ "error": e.to_string() }),
            ));
            return Ok(CommandOutput {
                result: json!({ "file": file, "checks": checks }),
                pass: false,
            });
        }
    };

    let scenario = *behavior.scenario();
    let ns = behavior.check_nonsignaling_on_support(tol::NONSIGNALING)?;
    checks.push(check(
        "nonsignaling",
        ns.passes(),
        Some(tol::NONSIGNALING),
        json!({ "max_deviation": ns.max_deviation }),
    ));

    let f = BellFunctional::build(&scenario)?;
    let bases = f.inequality_bases();
    let missing: Vec<&svetlichny_core::SettingTuple> =
        bases.iter().filter(|b| !behavior.supports(&b.0)).collect();
    checks.push(check(
        "inequality-bases-supported",
        missing.is_empty(),
        None,
        json!({ "bases": bases.len(), "unsupported": missing.len() }),
    ));

    let mut value = None;
    if missing.is_empty() {
        let v = f.evaluate(&behavior)?;
        value = Some(v);
        let max_value = 2.0 * scenario.n_settings() as f64 * (scenario.n_outcomes() as f64 - 1.0);
        checks.push(check(
            "value-in-range",
            v >= -tol::IDENTITY && v <= max_value + tol::IDENTITY,
            Some(tol::IDENTITY),
            json!({ "value": v, "max": max_value }),
        ));

        let marginal = checks::check_marginal_bound(&behavior, &f)?;
        checks.push(check(
            "marginal-bound",
            marginal.iter().all(|r| r.pass),
            Some(tol::BOUND_SLACK),
            json!({ "subsets": marginal.len() }),
        ));

        let mass = checks::max_violation_mass(&behavior, &f)?;
        let scale = (scenario.n_settings() as f64).powi(scenario.n_parties() as i32 - 2);
        let consistent = v * scale >= mass - tol::NORMALIZATION
            && v <= 2.0
                * scenario.n_settings() as f64
                * (scenario.n_outcomes() as f64 - 1.0)
                * mass
                + tol::NORMALIZATION;
        checks.push(check(
            "violation-mass-consistency",
            mass >= 0.0 && mass <= 1.0 + tol::NORMALIZATION && consistent,
            Some(tol::NORMALIZATION),
            json!({ "max_violation_mass": mass, "value": v }),
        ));

        let anchor = vec![0u8; scenario.n_parties() - 1];
        let mut overlap_ok = true;
        let mut floor_ok = true;
        for basis in &bases {
            let overlap = checks::check_overlap_bound(&behavior, &f, &basis.0, &anchor)?;
            overlap_ok &= overlap.pass;
            let term = f.term_for_basis(&basis.0).expect("basis has a term");
            let floor = checks::check_expectation_floor(&f.term_distribution(term, &behavior)?)?;
            floor_ok &= floor.pass;
        }
        checks.push(check(
            "overlap-bound",
            overlap_ok,
            Some(tol::BOUND_SLACK),
            json!({ "bases": bases.len(), "anchor": anchor }),
        ));
        checks.push(check(
            "expectation-floor",
            floor_ok,
            Some(tol::IDENTITY),
            json!({ "bases": bases.len() }),
        ));

        if scenario.n_parties() >= 3 && behavior.is_full_grid() {
            let mut perm: Vec<usize> = (0..scenario.n_parties()).collect();
            perm.swap(0, 2);
            let delta = functional::check_permutation_symmetry(&f, &behavior, &perm)?;
            checks.push(check(
                "outer-swap-invariance",
                delta < tol::IDENTITY,
                Some(tol::IDENTITY),
                json!({ "permutation": perm, "delta": delta }),
            ));
        }
    }

    let pass = all_pass(&checks);
    Ok(CommandOutput {
        result: json!({
            "file": file,
            "scenario": scenario,
            "value": value,
            "checks": checks,
        }),
        pass,
    })
}

fn cmd_share(
    args: &ShareArgs,
    csv: Option<&Path>,
    caps: &Caps,
) -> Result<CommandOutput, CoreError> {
    let scenario =
        Scenario::with_cell_cap(args.scenario.n, args.scenario.m, args.scenario.d, caps.cell)?;
    let source = match args.source {
        SourceKind::Quantum => sharing::SourceModel::Quantum,
        SourceKind::IdealBox => sharing::SourceModel::IdealBox,
        SourceKind::File => {
            let path = args.behavior.as_ref().ok_or_else(|| {
                CoreError::InvalidInput("--source file needs --behavior FILE".into())
            })?;
            sharing::SourceModel::External(read_behavior(path)?)
        }
    };
    let config = sharing::ProtocolConfig {
        scenario,
        rounds: args.rounds,
        seed: args.seed,
        source,
    };
    let transcript = sharing::run_protocol(&config)?;

    if let Some(path) = csv {
        let rows: Vec<String> = transcript
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                format!(
                    "{i},{},{},{}",
                    join(&r.settings, "-"),
                    join(&r.outcomes, "-"),
                    r.sifted
                )
            })
            .collect();
        write_csv(path, "round,settings,outcomes,sifted", &rows)?;
    }

    let f = BellFunctional::build(&scenario)?;
    let n_bases = f.inequality_bases().len() as f64;
    // Full-grid sampling sifts at rate (number of bases) / M^N = 2/M; a
    // restricted source draws from its own support, so no prediction here.
    let expected_sift_rate = if transcript.restricted_to_bases {
        None
    } else {
        Some(n_bases / scenario.n_setting_tuples() as f64)
    };

    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let security = match sharing::security_report(&transcript) {
        Ok(report) => {
            checks.push(check(
                "no-single-party-leak",
                !report.insecure,
                Some(tol::INSECURE_P_VALUE),
                json!({ "insecure": report.insecure }),
            ));
            Some(report)
        }
        Err(CoreError::InsufficientData(message)) => {
            notes.push(message);
            None
        }
        Err(e) => return Err(e),
    };

    let pass = all_pass(&checks);
    Ok(CommandOutput {
        result: json!({
            "scenario": transcript.scenario,
            "rounds": transcript.rounds,
            "seed": transcript.seed,
            "source": transcript.source,
            "restricted_to_bases": transcript.restricted_to_bases,
            "sifted_rounds": transcript.sifted_rounds,
            "sift_rate": transcript.sift_rate,
            "expected_sift_rate": expected_sift_rate,
            "reconstruction_errors": transcript.reconstruction_errors,
            "reconstruction_error_rate": transcript.reconstruction_error_rate,
            "sifted_outcome_counts": transcript.sifted_outcome_counts,
            "bell_estimate": transcript.bell_estimate,
            "security": security,
            "notes": notes,
            "checks": checks,
        }),
        pass,
    })
}

fn cmd_asymptotics(args: &AsymptoticsArgs, csv: Option<&Path>) -> Result<CommandOutput, CoreError> {
    let rows = quantum::convergence_table(args.n, args.d, &args.m_list)?;
    if rows.len() < 2 {
        return Err(CoreError::InvalidInput(
            "the fit needs at least two setting counts".into(),
        ));
    }
    let mut ordered: Vec<&quantum::ConvergenceRow> = rows.iter().collect();
    ordered.sort_by_key(|r| r.m);

    let points: Vec<(f64, f64)> = ordered.iter().map(|r| (r.m as f64, r.exact)).collect();
    let (slope, intercept) = quantum::fit_log_log(&points)?;
    let last = ordered[ordered.len() - 1];
    let previous = ordered[ordered.len() - 2];
    let ratio_change = (last.ratio / previous.ratio - 1.0).abs();

    if let Some(path) = csv {
        let csv_rows: Vec<String> = ordered
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{}",
                    r.m,
                    r.exact,
                    r.approximation,
                    r.ratio,
                    r.exact * r.m as f64
                )
            })
            .collect();
        write_csv(path, "m,exact,approximation,ratio,exact_times_m", &csv_rows)?;
    }

    let checks = vec![
        check(
            "log-log-slope-near-inverse-m",
            (-1.05..=-0.95).contains(&slope),
            Some(0.05),
            json!({ "slope": slope }),
        ),
        check(
            "exact-to-approximation-ratio-converged",
            ratio_change < 0.01,
            Some(0.01),
            json!({
                "relative_change": ratio_change,
                "between_m": [previous.m, last.m],
            }),
        ),
    ];
    let pass = all_pass(&checks);
    Ok(CommandOutput {
        result: json!({
            "rows": ordered.iter().map(|r| json!({
                "m": r.m,
                "exact": r.exact,
                "approximation": r.approximation,
                "ratio": r.ratio,
                "exact_times_m": r.exact * r.m as f64,
            })).collect::<Vec<_>>(),
            "slope": slope,
            "intercept": intercept,
            "ratio_constant": last.ratio,
            "checks": checks,
        }),
        pass,
    })
}
