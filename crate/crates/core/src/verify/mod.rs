//! Verification suites.
//!
//! Each suite checks one family of guarantees, either exactly on small
//! instances or by running a frozen list of scenarios. Suite membership and
//! parameters live in a versioned manifest compiled into the crate
//! ([`MANIFEST_JSON`]); a different manifest can be loaded with
//! [`Manifest::parse`].

mod exact;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{run_scenario, BoundDirection, BoundReport, ClassSpec, RunOptions, Scenario};

/// The built-in manifest.
pub const MANIFEST_JSON: &str = include_str!("manifest.json");

/// Manifest format understood by this version of the crate.
pub const MANIFEST_VERSION: u32 = 1;

/// How a measured value relates to its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `measured <= bound + tolerance`
    AtMost,
    /// `measured >= bound - tolerance`
    AtLeast,
    /// `|measured - bound| <= tolerance`
    Equal,
}

impl Relation {
    pub fn holds(self, measured: f64, bound: f64, tolerance: f64) -> bool {
        match self {
            Relation::AtMost => measured <= bound + tolerance,
            Relation::AtLeast => measured >= bound - tolerance,
            Relation::Equal => (measured - bound).abs() <= tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        }
    }
}

/// One checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub tolerance: f64,
    pub satisfied: bool,
    /// Free-form context, such as the number of states covered.
    pub detail: String,
}

impl Check {
    pub fn new(
        id: impl Into<String>,
        measured: f64,
        relation: Relation,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        Check {
            id: id.into(),
            measured,
            relation,
            bound,
            tolerance,
            satisfied: relation.holds(measured, bound, tolerance),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// The check a scenario report stands for.
    pub fn from_report(r: &BoundReport) -> Self {
        let tol = r.slack * r.summary.stderr;
        let (measured, relation, tolerance) = match r.direction {
            Some(BoundDirection::UpperMean) => (r.summary.mean, Relation::AtMost, tol),
            Some(BoundDirection::LowerMean) => (r.summary.mean, Relation::AtLeast, tol),
            Some(BoundDirection::MatchMean) => (r.summary.mean, Relation::Equal, tol),
            Some(BoundDirection::UpperPerRun) => (r.summary.max as f64, Relation::AtMost, 0.0),
            Some(BoundDirection::LowerPerRun) => (r.summary.min as f64, Relation::AtLeast, 0.0),
            None => (r.summary.mean, Relation::AtMost, 0.0),
        };
        let mut detail = format!(
            "mean {:.4} +- {:.4} over {} trials",
            r.summary.mean, r.summary.stderr, r.trials
        );
        if r.certificates_ok == Some(false) {
            detail.push_str("; certificate recount failed");
        }
        if let Some(rs) = r.r_star_max {
            detail.push_str(&format!("; max r* {rs}"));
        }
        Check {
            id: r.scenario_id.clone(),
            measured,
            relation,
            bound: r.bound.unwrap_or(f64::INFINITY),
            tolerance,
            // per-run bounds that vary by run are decided by the report
            satisfied: r.satisfied,
            detail,
        }
    }
}

/// Results of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub criterion: u32,
    pub checks: Vec<Check>,
    /// Scenario reports behind the scenario checks, sorted by id.
    pub reports: Vec<BoundReport>,
    pub runtime_ms: u128,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.satisfied)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.satisfied)
    }
}

/// Grid of experts states `(n, k, r)`, all combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpertsGrid {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub r: Vec<u32>,
}

impl ExpertsGrid {
    pub fn cells(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for &k in &self.k {
            for &n in &self.n {
                for &r in &self.r {
                    out.push((n, k, r));
                }
            }
        }
        out
    }
}

/// Parameters of one suite, tagged by the suite name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SuiteConfig {
    /// Primal against dual values on every reachable state.
    Dual {
        criterion: u32,
        /// Experts classes with `k` in this list and `k <= n <= n_max`.
        k: Vec<usize>,
        n_max: usize,
        r_max: u32,
        /// Further classes, each checked for budgets `0..=r_max`.
        classes: Vec<ClassSpec>,
        tolerance: f64,
        time_limit_s: f64,
    },
    /// Memoized recursions against brute-force game trees.
    Oracle {
        criterion: u32,
        k: Vec<usize>,
        max_total: u32,
        max_budget: u32,
        max_horizon: u32,
        tolerance: f64,
    },
    /// Stabilized values inside the experts sandwich.
    ExpertsRand {
        criterion: u32,
        grid: ExpertsGrid,
        tolerance: f64,
        #[serde(default)]
        scenarios: Vec<Scenario>,
    },
    /// The potential bound on every memoized experts state.
    Potential {
        criterion: u32,
        grid: ExpertsGrid,
        tolerance: f64,
    },
    /// The technical inequality on a grid.
    Lemma {
        criterion: u32,
        k_min: usize,
        k_max: usize,
        resolution: usize,
    },
    ExpertsDet {
        criterion: u32,
        scenarios: Vec<Scenario>,
    },
    Reduction {
        criterion: u32,
        scenarios: Vec<Scenario>,
    },
    Constant {
        criterion: u32,
        scenarios: Vec<Scenario>,
    },
    /// Exact deterministic values of H(d,k) plus scenarios.
    Hdk {
        criterion: u32,
        /// `(d, k)` pairs.
        exact: Vec<(usize, usize)>,
        scenarios: Vec<Scenario>,
    },
    Dt {
        criterion: u32,
        scenarios: Vec<Scenario>,
    },
    /// Scenarios run twice with the same seed.
    Determinism {
        criterion: u32,
        scenarios: Vec<Scenario>,
    },
}

impl SuiteConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteConfig::Dual { .. } => "dual",
            SuiteConfig::Oracle { .. } => "oracle",
            SuiteConfig::ExpertsRand { .. } => "experts-rand",
            SuiteConfig::Potential { .. } => "potential",
            SuiteConfig::Lemma { .. } => "lemma",
            SuiteConfig::ExpertsDet { .. } => "experts-det",
            SuiteConfig::Reduction { .. } => "reduction",
            SuiteConfig::Constant { .. } => "constant",
            SuiteConfig::Hdk { .. } => "hdk",
            SuiteConfig::Dt { .. } => "dt",
            SuiteConfig::Determinism { .. } => "determinism",
        }
    }

    pub fn criterion(&self) -> u32 {
        match self {
            SuiteConfig::Dual { criterion, .. }
            | SuiteConfig::Oracle { criterion, .. }
            | SuiteConfig::ExpertsRand { criterion, .. }
            | SuiteConfig::Potential { criterion, .. }
            | SuiteConfig::Lemma { criterion, .. }
            | SuiteConfig::ExpertsDet { criterion, .. }
            | SuiteConfig::Reduction { criterion, .. }
            | SuiteConfig::Constant { criterion, .. }
            | SuiteConfig::Hdk { criterion, .. }
            | SuiteConfig::Dt { criterion, .. }
            | SuiteConfig::Determinism { criterion, .. } => *criterion,
        }
    }

    /// Scenarios run by this suite, if any.
    pub fn scenarios(&self) -> &[Scenario] {
        match self {
            SuiteConfig::ExpertsRand { scenarios, .. }
            | SuiteConfig::ExpertsDet { scenarios, .. }
            | SuiteConfig::Reduction { scenarios, .. }
            | SuiteConfig::Constant { scenarios, .. }
            | SuiteConfig::Hdk { scenarios, .. }
            | SuiteConfig::Dt { scenarios, .. }
            | SuiteConfig::Determinism { scenarios, .. } => scenarios,
            _ => &[],
        }
    }
}

/// A versioned list of suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub suites: Vec<SuiteConfig>,
}

impl Manifest {
    /// The manifest compiled into the crate.
    pub fn builtin() -> Self {
        Self::parse(MANIFEST_JSON).expect("built-in manifest is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: Manifest =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Config(format!(
                "manifest version {} is not supported (expected {MANIFEST_VERSION})",
                m.version
            )));
        }
        for s in &m.suites {
            for sc in s.scenarios() {
                sc.validate()?;
            }
        }
        Ok(m)
    }

    pub fn suite_names(&self) -> Vec<&'static str> {
        self.suites.iter().map(SuiteConfig::name).collect()
    }

    pub fn suite(&self, name: &str) -> Result<&SuiteConfig> {
        self.suites
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown suite {name:?}; known suites: {}",
                    self.suite_names().join(", ")
                ))
            })
    }
}

/// Overrides for scenario-based suites.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl VerifyOptions {
    fn run_options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            trials: self.trials,
            horizon: None,
            audit: true,
        }
    }
}

/// Runs one suite.
pub fn run_suite(config: &SuiteConfig, opts: &VerifyOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut reports = Vec::new();
    let checks = match config {
        SuiteConfig::Dual {
            k,
            n_max,
            r_max,
            classes,
            tolerance,
            time_limit_s,
            ..
        } => exact::dual(k, *n_max, *r_max, classes, *tolerance, *time_limit_s)?,
        SuiteConfig::Oracle {
            k,
            max_total,
            max_budget,
            max_horizon,
            tolerance,
            ..
        } => exact::oracle(k, *max_total, *max_budget, *max_horizon, *tolerance)?,
        SuiteConfig::ExpertsRand {
            grid,
            tolerance,
            scenarios,
            ..
        } => {
            let mut c = exact::experts_sandwich(grid, *tolerance)?;
            c.extend(scenario_checks(scenarios, opts, &mut reports)?);
            c
        }
        SuiteConfig::Potential {
            grid, tolerance, ..
        } => exact::potential(grid, *tolerance)?,
        SuiteConfig::Lemma {
            k_min,
            k_max,
            resolution,
            ..
        } => exact::lemma(*k_min, *k_max, *resolution)?,
        SuiteConfig::Hdk {
            exact: pairs,
            scenarios,
            ..
        } => {
            let mut c = exact::hdk(pairs)?;
            c.extend(scenario_checks(scenarios, opts, &mut reports)?);
            c
        }
        SuiteConfig::Determinism { scenarios, .. } => determinism(scenarios, opts)?,
        SuiteConfig::ExpertsDet { scenarios, .. }
        | SuiteConfig::Reduction { scenarios, .. }
        | SuiteConfig::Constant { scenarios, .. }
        | SuiteConfig::Dt { scenarios, .. } => scenario_checks(scenarios, opts, &mut reports)?,
    };
    reports.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
    Ok(SuiteReport {
        suite: config.name().into(),
        criterion: config.criterion(),
        checks,
        reports,
        runtime_ms: start.elapsed().as_millis(),
    })
}

/// Runs every suite of `manifest` in manifest order.
pub fn run_all(manifest: &Manifest, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    manifest.suites.iter().map(|s| run_suite(s, opts)).collect()
}

fn scenario_checks(
    scenarios: &[Scenario],
    opts: &VerifyOptions,
    reports: &mut Vec<BoundReport>,
) -> Result<Vec<Check>> {
    let mut out = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let r = run_scenario(s, &opts.run_options())
            .map_err(|e| Error::Config(format!("{}: {e}", s.id)))?;
        out.push(Check::from_report(&r));
        reports.push(BoundReport { audit: None, ..r });
    }
    Ok(out)
}

/// CSV of `reports` without the runtime column.
pub fn csv_without_runtime(reports: &[BoundReport]) -> Result<String> {
    let mut buf = Vec::new();
    crate::scenario::write_csv(reports, &mut buf)?;
    let text = String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))?;
    Ok(text
        .lines()
        .map(|l| match l.rfind(',') {
            Some(i) => &l[..i],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

fn determinism(scenarios: &[Scenario], opts: &VerifyOptions) -> Result<Vec<Check>> {
    let run_opts = RunOptions {
        audit: false,
        ..opts.run_options()
    };
    let mut out = Vec::new();
    for s in scenarios {
        let a = csv_without_runtime(&[run_scenario(s, &run_opts)?])?;
        let b = csv_without_runtime(&[run_scenario(s, &run_opts)?])?;
        let same = a == b;
        out.push(
            Check::new(s.id.clone(), same as u8 as f64, Relation::Equal, 1.0, 0.0).with_detail(
                if same {
                    "identical CSV"
                } else {
                    "CSV differs between runs"
                },
            ),
        );
    }
    Ok(out)
}
