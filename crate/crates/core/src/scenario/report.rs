use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{AdversarySpec, LearnerSpec, Prepared, Scenario};
use crate::classes::{min_inconsistency, ClassKind};
use crate::engine::{run_trials, MonteCarloSummary, RoundAudit};
use crate::error::{Error, Result};
use crate::learners::{Alpha, WeightedPlurality};

/// Which side of the measurement a bound constrains, and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    /// `mean <= bound + slack * stderr`
    UpperMean,
    /// `mean >= bound - slack * stderr`
    LowerMean,
    /// `|mean - bound| <= slack * stderr`
    MatchMean,
    /// Every run has at most `bound` mistakes.
    UpperPerRun,
    /// Every run has at least `bound` mistakes.
    LowerPerRun,
}

/// Named bound formulas. `k` is the label count, `n` the number of
/// hypotheses and `r` the uniform budget of the scenario's class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    /// `k log_k n + 2kr`
    ExpertsRandUpper,
    /// `max((k-1)/2 floor(log_k n), (k-1) r/2)`
    ExpertsRandLower,
    /// `(k-1)/2 floor(log_k n)`
    ObliviousLower,
    /// `(k-1) r / 2`
    AdaptiveLower,
    /// `(alpha/(alpha-1)) k ln(n alpha^r / k) + k - 1` for every run.
    WeightedPlurality,
    /// `k(r+1) - 1` for every run.
    BudgetLabel,
    /// `ceil((k/2 - 1) ln(n/k))` for every run.
    EvenSplit,
    /// `3 k r'` with `r'` the full-information deterministic value.
    Reduction,
    /// `6 k` times the full-information randomized value.
    FullVsBandit,
    /// `34 (k + r)`
    ConstantClass,
    /// `2 (d + k)` for H(d,k) (`k` positive labels).
    HdkRand,
    /// `d k` for every run.
    HdkBandit,
    /// `d + 1` for every run.
    HdkFull,
    /// `10 d1 (r* + d2)` for every run, `r*` its best inconsistency count.
    Dt,
    /// `2 d1 d2` for every run with `r* <= d2`.
    DtSmall,
    /// The exact randomized value, from below.
    ExactLower,
    /// The exact randomized value, two-sided.
    ExactMatch,
}

impl BoundId {
    pub fn direction(self) -> BoundDirection {
        use BoundDirection::*;
        match self {
            BoundId::ExpertsRandUpper
            | BoundId::Reduction
            | BoundId::FullVsBandit
            | BoundId::ConstantClass
            | BoundId::HdkRand => UpperMean,
            BoundId::ExpertsRandLower
            | BoundId::ObliviousLower
            | BoundId::AdaptiveLower
            | BoundId::ExactLower => LowerMean,
            BoundId::ExactMatch => MatchMean,
            BoundId::WeightedPlurality | BoundId::Dt | BoundId::DtSmall => UpperPerRun,
            BoundId::BudgetLabel | BoundId::EvenSplit | BoundId::HdkBandit | BoundId::HdkFull => {
                LowerPerRun
            }
        }
    }

    fn needs_r_star(self) -> bool {
        matches!(self, BoundId::Dt | BoundId::DtSmall)
    }
}

/// `floor(log_k n)`, computed in integers.
pub fn floor_log(n: usize, k: usize) -> u32 {
    let mut m = 0;
    let mut p = k;
    while p <= n {
        m += 1;
        p = match p.checked_mul(k) {
            Some(q) => q,
            None => break,
        };
    }
    m
}

fn hdk_params(p: &Prepared) -> Result<(f64, f64)> {
    match p.class.kind() {
        ClassKind::Hdk { d, k } => Ok((d as f64, k as f64)),
        _ => Err(Error::Config(format!(
            "{}: bound needs an H(d,k) class",
            p.scenario.id
        ))),
    }
}

/// Value of a bound that does not depend on the individual run.
fn static_bound(id: BoundId, p: &Prepared, exact: Option<f64>) -> Result<f64> {
    let (k, n, r) = (p.k() as f64, p.n() as f64, p.r() as f64);
    Ok(match id {
        BoundId::ExpertsRandUpper => k * n.ln() / k.ln() + 2.0 * k * r,
        BoundId::ExpertsRandLower => {
            ((k - 1.0) / 2.0 * floor_log(p.n(), p.k()) as f64).max((k - 1.0) * r / 2.0)
        }
        BoundId::ObliviousLower => (k - 1.0) / 2.0 * floor_log(p.n(), p.k()) as f64,
        BoundId::AdaptiveLower => (k - 1.0) * r / 2.0,
        BoundId::WeightedPlurality => {
            let alpha = match &p.scenario.learner {
                LearnerSpec::WeightedPlurality { alpha } => alpha.resolve()?,
                _ => Alpha::Finite(std::f64::consts::E),
            };
            WeightedPlurality::new(p.n(), p.k(), p.r(), alpha)?.mistake_bound()
        }
        BoundId::BudgetLabel => k * (r + 1.0) - 1.0,
        BoundId::EvenSplit => ((k / 2.0 - 1.0) * (n / k).ln()).ceil(),
        BoundId::Reduction => 3.0 * k * p.reduction_depth()? as f64,
        BoundId::FullVsBandit => 6.0 * k * p.game_solver().opt_full_rand(&p.declared)?.value,
        BoundId::ConstantClass => 34.0 * (k + r),
        BoundId::HdkRand => {
            let (d, k) = hdk_params(p)?;
            2.0 * (d + k)
        }
        BoundId::HdkBandit => {
            let (d, k) = hdk_params(p)?;
            d * k
        }
        BoundId::HdkFull => hdk_params(p)?.0 + 1.0,
        BoundId::Dt | BoundId::DtSmall => {
            let (d1, d2) = p.dt_constants().ok_or_else(|| {
                Error::Config(format!("{}: dt bounds need the dt learner", p.scenario.id))
            })?;
            match id {
                BoundId::DtSmall => 2.0 * d1 * d2,
                _ => 10.0 * d1 * d2,
            }
        }
        BoundId::ExactLower | BoundId::ExactMatch => {
            exact.ok_or_else(|| Error::Config("exact value missing".into()))?
        }
    })
}

/// Overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub horizon: Option<usize>,
    /// Recount every run's certificate and keep the first run's rounds.
    pub audit: bool,
}

/// Outcome of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub scenario_id: String,
    pub mode: String,
    pub learner: String,
    pub adversary: String,
    pub k: usize,
    pub n: usize,
    pub r: u32,
    pub d: Option<usize>,
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    pub summary: MonteCarloSummary,
    pub exact_value: Option<f64>,
    pub bound_id: Option<BoundId>,
    pub direction: Option<BoundDirection>,
    pub bound: Option<f64>,
    pub slack: f64,
    /// Runs the bound applies to (all runs except for `dt_small`).
    pub applicable_runs: usize,
    /// Largest best-hypothesis inconsistency count over the runs, when
    /// computed.
    pub r_star_max: Option<u32>,
    /// Every certificate recounted and within budget (audit mode only).
    pub certificates_ok: Option<bool>,
    pub satisfied: bool,
    pub runtime_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<Vec<RoundAudit>>,
}

impl BoundReport {
    /// The CSV row of this report.
    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            scenario_id: self.scenario_id.clone(),
            mode: self.mode.clone(),
            learner: self.learner.clone(),
            adversary: self.adversary.clone(),
            k: self.k,
            n: self.n,
            r: self.r,
            d: self.d,
            horizon: self.horizon,
            trials: self.trials,
            seed: self.seed,
            mean: self.summary.mean,
            stderr: self.summary.stderr,
            exact_value: self.exact_value,
            bound: self.bound,
            satisfied: self.satisfied,
            runtime_ms: self.runtime_ms,
        }
    }
}

/// One line of the scenario CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub scenario_id: String,
    pub mode: String,
    pub learner: String,
    pub adversary: String,
    pub k: usize,
    pub n: usize,
    pub r: u32,
    pub d: Option<usize>,
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub exact_value: Option<f64>,
    pub bound: Option<f64>,
    pub satisfied: bool,
    pub runtime_ms: u128,
}

/// Writes reports as CSV with a header row.
pub fn write_csv<W: std::io::Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r.csv_row())
            .map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(())
}

struct TrialOutcome {
    mistakes: usize,
    r_star: Option<u32>,
    certificate_ok: bool,
    rounds: Option<Vec<RoundAudit>>,
}

/// Runs a scenario and checks its bound.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<BoundReport> {
    let start = Instant::now();
    let mut s = scenario.clone();
    if let Some(seed) = opts.seed {
        s.seed = seed;
    }
    if let Some(t) = opts.trials {
        s.trials = t;
    }
    if let Some(h) = opts.horizon {
        s.horizon = h;
    }
    let p = Prepared::new(&s)?;
    let need_r_star = opts.audit || s.bound.is_some_and(BoundId::needs_r_star);
    let budget = p.r();
    let outcomes = run_trials(
        s.mode,
        &p.declared,
        &|seed| p.learner(seed),
        &|seed| p.adversary(seed),
        s.horizon,
        s.trials,
        s.seed,
        |i, run| {
            let r_star = need_r_star.then(|| min_inconsistency(&p.class, &run.transcript.records));
            let certificate_ok = !opts.audit
                || (r_star.is_some_and(|m| m <= budget)
                    && run.certificate.as_ref().is_none_or(|c| {
                        c.inconsistencies <= c.budget
                            && c.inconsistencies
                                == crate::adversaries::certify_count(
                                    &p.class,
                                    c.hypothesis,
                                    &run.transcript,
                                )
                    }));
            Ok(TrialOutcome {
                mistakes: run.mistakes,
                r_star,
                certificate_ok,
                rounds: (opts.audit && i == 0).then_some(run.rounds),
            })
        },
    )?;
    let counts: Vec<usize> = outcomes.iter().map(|o| o.mistakes).collect();
    let summary = MonteCarloSummary::from_counts(&counts);
    let want_exact = s.exact || matches!(s.bound, Some(BoundId::ExactLower | BoundId::ExactMatch));
    let exact_value = if want_exact {
        Some(match s.mode {
            crate::engine::Mode::Bandit => p.game_solver().stabilized_value(&p.declared)?.value,
            crate::engine::Mode::Full => p.game_solver().opt_full_rand(&p.declared)?.value,
        })
    } else {
        None
    };
    let r_star_max = outcomes.iter().filter_map(|o| o.r_star).max();
    let certificates_ok = opts
        .audit
        .then(|| outcomes.iter().all(|o| o.certificate_ok));

    let mut bound = None;
    let mut applicable_runs = outcomes.len();
    let mut satisfied = true;
    if let Some(id) = s.bound {
        let base = static_bound(id, &p, exact_value)?;
        let slack = s.slack * summary.stderr;
        let (value, ok) = match id.direction() {
            BoundDirection::UpperMean => (base, summary.mean <= base + slack),
            BoundDirection::LowerMean => (base, summary.mean >= base - slack),
            BoundDirection::MatchMean => (base, (summary.mean - base).abs() <= slack),
            BoundDirection::LowerPerRun => (base, summary.min as f64 >= base),
            BoundDirection::UpperPerRun => match id {
                BoundId::Dt => {
                    let (d1, d2) = p.dt_constants().expect("checked by static_bound");
                    let per_run = |rs: u32| 10.0 * d1 * (rs as f64 + d2);
                    let ok = outcomes
                        .iter()
                        .all(|o| o.mistakes as f64 <= per_run(o.r_star.expect("computed")));
                    (per_run(r_star_max.unwrap_or(0)), ok)
                }
                BoundId::DtSmall => {
                    let (_, d2) = p.dt_constants().expect("checked by static_bound");
                    let applicable: Vec<&TrialOutcome> = outcomes
                        .iter()
                        .filter(|o| o.r_star.expect("computed") as f64 <= d2)
                        .collect();
                    applicable_runs = applicable.len();
                    (base, applicable.iter().all(|o| o.mistakes as f64 <= base))
                }
                _ => (base, summary.max as f64 <= base),
            },
        };
        bound = Some(value);
        satisfied = ok;
    }
    if certificates_ok == Some(false) {
        satisfied = false;
    }
    Ok(BoundReport {
        scenario_id: s.id.clone(),
        mode: s.mode.to_string(),
        learner: s.learner.name().into(),
        adversary: adversary_label(&s.adversary),
        k: p.k(),
        n: p.n(),
        r: budget,
        d: s.class.d(),
        horizon: s.horizon,
        trials: s.trials,
        seed: s.seed,
        summary,
        exact_value,
        bound_id: s.bound,
        direction: s.bound.map(BoundId::direction),
        bound,
        slack: s.slack,
        applicable_runs,
        r_star_max,
        certificates_ok,
        satisfied,
        runtime_ms: start.elapsed().as_millis(),
        audit: outcomes.into_iter().next().and_then(|o| o.rounds),
    })
}

fn adversary_label(a: &AdversarySpec) -> String {
    a.name().into()
}

/// Runs several scenarios and returns their reports sorted by id.
pub fn run_scenarios(scenarios: &[Scenario], opts: &RunOptions) -> Result<Vec<BoundReport>> {
    let mut reports = scenarios
        .iter()
        .map(|s| run_scenario(s, opts))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_logs() {
        assert_eq!(floor_log(8, 2), 3);
        assert_eq!(floor_log(9, 2), 3);
        assert_eq!(floor_log(2, 3), 0);
        assert_eq!(floor_log(9, 3), 2);
        assert_eq!(floor_log(1, 2), 0);
    }
}
