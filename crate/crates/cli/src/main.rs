//! `mistakebound`: exact game values, scenario simulation, verification
//! suites and the technical-lemma check.
//!
//! Exit status is 0 when everything checked holds, 1 when a bound is
//! violated and 2 on configuration or solver errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mistakebound::lemma::{check_fk, LemmaReport, MIN_RESOLUTION};
use mistakebound::scenario::{parse_scenarios, run_scenarios, write_csv, RunOptions, StateSpec};
use mistakebound::verify::{run_suite, Manifest, SuiteReport, VerifyOptions};
use mistakebound::Error;

#[derive(Parser, Debug)]
#[command(
    name = "mistakebound",
    version,
    about = "Online multiclass games under bandit and full-information feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact minimax value of a state, from both sides of the game.
    Value(ValueArgs),
    /// Run the scenarios of a file and check their bounds.
    Simulate(SimulateArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Check f_k(beta) <= -1 on a grid.
    LemmaFk(LemmaArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ValueArgs {
    /// State as inline JSON or a path to a JSON file, e.g.
    /// '{"counts": [0, 2], "k": 2}' or '{"class": {"kind": "constant", "k": 3, "r": 1}}'.
    #[arg(long)]
    state: String,
    /// Evaluate at this horizon instead of stabilizing.
    #[arg(long)]
    horizon: Option<u32>,
    /// Skip recomputing the value in the dual game.
    #[arg(long)]
    no_dual: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario file (one scenario object or an array).
    #[arg(long)]
    scenario: PathBuf,
    /// Override every scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override every scenario's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override every scenario's horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Recount every certificate and include the first run's rounds (JSON).
    #[arg(long)]
    audit: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    out: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suites to run; all suites of the manifest when omitted.
    suites: Vec<String>,
    /// Manifest file replacing the built-in one.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Override the seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count of every scenario.
    #[arg(long)]
    trials: Option<usize>,
    /// List the suites of the manifest and exit.
    #[arg(long)]
    list: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    out: Format,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    /// Grid points on [0, 1].
    #[arg(long, default_value_t = 10_000)]
    resolution: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    out: Format,
}

/// A failed command: configuration trouble or a violated bound.
enum Failure {
    Config(String),
    Violation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Value(a) => value(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::LemmaFk(a) => lemma_fk(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn value(a: ValueArgs) -> Result<(), Failure> {
    let text = if a.state.trim_start().starts_with('{') {
        a.state.clone()
    } else {
        read(Path::new(&a.state))?
    };
    let v = StateSpec::parse(&text)?.evaluate(a.horizon, !a.no_dual)?;
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let scenarios = parse_scenarios(&read(&a.scenario)?)?;
    let opts = RunOptions {
        seed: a.seed,
        trials: a.trials,
        horizon: a.horizon,
        audit: a.audit,
    };
    let reports = run_scenarios(&scenarios, &opts)?;
    let stdout = std::io::stdout();
    match a.out {
        Format::Csv => write_csv(&reports, stdout.lock())?,
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
    }
    for r in reports.iter().filter(|r| !r.satisfied) {
        eprintln!(
            "bound violated: {} (mean {}, bound {:?})",
            r.scenario_id, r.summary.mean, r.bound
        );
    }
    if reports.iter().all(|r| r.satisfied) {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let manifest = match &a.manifest {
        Some(p) => Manifest::parse(&read(p)?)?,
        None => Manifest::builtin(),
    };
    if a.list {
        for s in &manifest.suites {
            println!("{}\t{}", s.name(), s.scenarios().len());
        }
        return Ok(());
    }
    let configs = if a.suites.is_empty() {
        manifest.suites.iter().collect::<Vec<_>>()
    } else {
        a.suites
            .iter()
            .map(|name| manifest.suite(name))
            .collect::<Result<Vec<_>, _>>()?
    };
    let opts = VerifyOptions {
        seed: a.seed,
        trials: a.trials,
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for c in configs {
        let r = run_suite(c, &opts)?;
        eprintln!(
            "{:<14} {} ({} checks, {} ms)",
            r.suite,
            if r.passed() { "pass" } else { "FAIL" },
            r.checks.len(),
            r.runtime_ms
        );
        reports.push(r);
    }
    match a.out {
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
        Format::Csv => write_checks(&reports)?,
    }
    if reports.iter().all(SuiteReport::passed) {
        Ok(())
    } else {
        for r in &reports {
            for c in r.failures() {
                eprintln!(
                    "failed: {} measured {} {} {} (tolerance {}) {}",
                    c.id,
                    c.measured,
                    c.relation.symbol(),
                    c.bound,
                    c.tolerance,
                    c.detail
                );
            }
        }
        Err(Failure::Violation)
    }
}

fn write_checks(reports: &[SuiteReport]) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "suite,criterion,id,measured,relation,bound,tolerance,satisfied"
    )?;
    for r in reports {
        for c in &r.checks {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.suite,
                r.criterion,
                c.id,
                c.measured,
                c.relation.symbol(),
                c.bound,
                c.tolerance,
                c.satisfied
            )?;
        }
    }
    Ok(())
}

fn lemma_fk(a: LemmaArgs) -> Result<(), Failure> {
    if a.resolution < MIN_RESOLUTION {
        return Err(Failure::Config(format!(
            "--resolution must be at least {MIN_RESOLUTION}"
        )));
    }
    let report = check_fk(a.k_min..=a.k_max, a.resolution)?;
    match a.out {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv => write_lemma(&report)?,
    }
    for row in report.rows.iter().filter(|r| !r.quoted_form_ok) {
        eprintln!(
            "note: k = {}: g_k(beta_k) = {:e} differs from (k^2+1)(k-1)^(k-1)/k^(3k) = {:e}; it equals (k^2+1)^k (k-1)^(k-1)/k^(3k) = {:e}",
            row.k, row.g_at_beta_k, row.g_quoted_form, row.g_closed_form
        );
    }
    match report.check() {
        Ok(()) => Ok(()),
        Err(e) => {
            eprintln!("{e}");
            Err(Failure::Violation)
        }
    }
}

fn write_lemma(report: &LemmaReport) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "k,grid_max,grid_argmax,beta_k,f_at_beta_k,g_at_beta_k,g_closed_form,closed_form_error,quoted_form_error,chain_lhs,chain_rhs,passed"
    )?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:e},{:e},{},{},{}",
            r.k,
            r.grid_max,
            r.grid_argmax,
            r.beta_k,
            r.f_at_beta_k,
            r.g_at_beta_k,
            r.g_closed_form,
            r.closed_form_error,
            r.quoted_form_error,
            r.chain_lhs,
            r.chain_rhs,
            r.passed()
        )?;
    }
    Ok(())
}
