//! JSON scenarios: a game mode, a class, a learner, an adversary, a horizon
//! and a seed, plus an optional bound to check the result against.
//!
//! ```json
//! {
//!   "id": "wp-even-split",
//!   "mode": "bandit",
//!   "class": {"kind": "experts", "n": 8, "k": 2},
//!   "learner": {"name": "weighted_plurality"},
//!   "adversary": {"name": "even_split"},
//!   "horizon": 50,
//!   "trials": 1,
//!   "seed": 7,
//!   "bound": "weighted_plurality"
//! }
//! ```
//!
//! A scenario file holds one such object or an array of them.

mod build;
mod report;
mod state;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use build::Prepared;
pub use report::{
    floor_log, run_scenario, run_scenarios, write_csv, BoundDirection, BoundId, BoundReport,
    CsvRow, RunOptions,
};
pub use state::{StateSpec, StateValue};

use crate::classes::{BudgetedVersionSpace, ClassKind, ConceptClass, Instance, DEFAULT_CLASS_CAP};
use crate::dist::Label;
use crate::engine::Mode;
use crate::error::{Error, Result};

/// Default number of Monte-Carlo trials.
pub const DEFAULT_TRIALS: usize = 10_000;
/// Default slack, in standard errors, for mean-based bounds.
pub const DEFAULT_SLACK: f64 = 3.0;

/// The hypothesis class and its uniform budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    Experts {
        n: usize,
        k: usize,
        #[serde(default)]
        r: u32,
    },
    Constant {
        k: usize,
        #[serde(default = "one")]
        domain: usize,
        #[serde(default)]
        r: u32,
    },
    Hdk {
        d: usize,
        k: usize,
        #[serde(default)]
        r: u32,
    },
    /// An explicit table, `rows[h][x] = h(x)`.
    Table {
        labels: usize,
        rows: Vec<Vec<Label>>,
        #[serde(default)]
        r: u32,
    },
}

fn one() -> usize {
    1
}

impl ClassSpec {
    pub fn build(&self) -> Result<Arc<ConceptClass>> {
        Ok(Arc::new(match self {
            ClassSpec::Experts { n, k, .. } => ConceptClass::experts(*n, *k)?,
            ClassSpec::Constant { k, domain, .. } => ConceptClass::constant(*k, *domain)?,
            ClassSpec::Hdk { d, k, .. } => ConceptClass::hdk(*d, *k, DEFAULT_CLASS_CAP)?,
            ClassSpec::Table { labels, rows, .. } => {
                ConceptClass::from_table(*labels, rows.clone(), None)?
            }
        }))
    }

    pub fn budget(&self) -> u32 {
        match self {
            ClassSpec::Experts { r, .. }
            | ClassSpec::Constant { r, .. }
            | ClassSpec::Hdk { r, .. }
            | ClassSpec::Table { r, .. } => *r,
        }
    }

    /// The declared budgeted version space.
    pub fn declared(&self) -> Result<BudgetedVersionSpace> {
        Ok(BudgetedVersionSpace::uniform(self.build()?, self.budget()))
    }

    /// `d` of an H(d,k) class.
    pub fn d(&self) -> Option<usize> {
        match self {
            ClassSpec::Hdk { d, .. } => Some(*d),
            _ => None,
        }
    }
}

/// Penalty factor of the weighted plurality learner: a number greater than
/// one, or `"inf"` for elimination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Name(String),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Value(std::f64::consts::E)
    }
}

impl AlphaSpec {
    pub fn resolve(&self) -> Result<crate::learners::Alpha> {
        use crate::learners::Alpha;
        match self {
            AlphaSpec::Value(a) => Ok(Alpha::Finite(*a)),
            AlphaSpec::Name(s) if s == "inf" || s == "infinity" => Ok(Alpha::Infinite),
            AlphaSpec::Name(s) => Err(Error::Config(format!("unknown alpha {s:?}"))),
        }
    }
}

/// Experts learner used inside the bandit reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionExperts {
    #[default]
    BanditRandSoa,
    WeightedPlurality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    BanditRandSoa {
        /// Planning horizon; the stabilization horizon when absent.
        #[serde(default)]
        horizon: Option<u32>,
    },
    WeightedPlurality {
        #[serde(default)]
        alpha: AlphaSpec,
    },
    Soa,
    Reduction {
        #[serde(default)]
        experts: ReductionExperts,
    },
    ConstantTwoPhase,
    HdkTwoPhase,
    Dt {
        #[serde(default)]
        d1: Option<f64>,
        #[serde(default)]
        d2: Option<f64>,
    },
    Uniform,
    Fixed {
        label: Label,
    },
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::BanditRandSoa { .. } => "bandit_rand_soa",
            LearnerSpec::WeightedPlurality { .. } => "weighted_plurality",
            LearnerSpec::Soa => "soa",
            LearnerSpec::Reduction { .. } => "reduction",
            LearnerSpec::ConstantTwoPhase => "constant_two_phase",
            LearnerSpec::HdkTwoPhase => "hdk_two_phase",
            LearnerSpec::Dt { .. } => "dt",
            LearnerSpec::Uniform => "uniform",
            LearnerSpec::Fixed { .. } => "fixed",
        }
    }
}

/// Where the corrupted rounds of a planted sequence go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    #[default]
    Random,
    Front,
    Back,
}

/// Recipe for a random oblivious sequence: `length` rounds labeled by the
/// hypothesis `target`, except `corruptions` rounds that get another label.
/// Instances are uniform points, or uniform profiles for experts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Planted {
    pub target: usize,
    pub length: usize,
    #[serde(default)]
    pub corruptions: u32,
    #[serde(default)]
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Either an explicit `sequence` of `[instance, label]` pairs or a
    /// `planted` recipe, drawn afresh for every trial.
    Oblivious {
        #[serde(default)]
        sequence: Option<Vec<(Instance, Label)>>,
        #[serde(default)]
        planted: Option<Planted>,
    },
    EvenSplit,
    BudgetLabel,
    RandomTarget,
    Geometric,
    Hdk,
    HdkFullinfo,
    ValueOptimal {
        #[serde(default)]
        horizon: Option<u32>,
    },
}

impl AdversarySpec {
    pub fn name(&self) -> &'static str {
        match self {
            AdversarySpec::Oblivious { .. } => "oblivious",
            AdversarySpec::EvenSplit => "even_split",
            AdversarySpec::BudgetLabel => "budget_label",
            AdversarySpec::RandomTarget => "random_target",
            AdversarySpec::Geometric => "geometric",
            AdversarySpec::Hdk => "hdk",
            AdversarySpec::HdkFullinfo => "hdk_fullinfo",
            AdversarySpec::ValueOptimal { .. } => "value_optimal",
        }
    }
}

/// One configured experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub mode: Mode,
    pub class: ClassSpec,
    pub learner: LearnerSpec,
    pub adversary: AdversarySpec,
    pub horizon: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub bound: Option<BoundId>,
    /// Slack in standard errors for mean-based bounds.
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Also compute the exact randomized game value of the declared state.
    #[serde(default)]
    pub exact: bool,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

/// Parses a scenario file holding one scenario or an array of them.
/// Errors report the line and column.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let parsed = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<Scenario>>(text)
    } else {
        serde_json::from_str::<Scenario>(text).map(|s| vec![s])
    };
    let out = parsed.map_err(|e| Error::Config(format!("invalid scenario file: {e}")))?;
    for s in &out {
        s.validate()?;
    }
    Ok(out)
}

impl Scenario {
    /// Checks the parts of a scenario that deserialization cannot.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Config("scenario id must not be empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config(format!(
                "{}: trials must be at least 1",
                self.id
            )));
        }
        if self.slack.is_nan() || self.slack < 0.0 {
            return Err(Error::Config(format!(
                "{}: slack must be non-negative",
                self.id
            )));
        }
        let class = self.class.build()?;
        let needs = |ok: bool, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{}: {} needs {what}",
                    self.id,
                    self.adversary.name()
                )))
            }
        };
        let experts = matches!(self.class, ClassSpec::Experts { .. });
        match &self.adversary {
            AdversarySpec::Oblivious { sequence, planted } => needs(
                sequence.is_some() != planted.is_some(),
                "exactly one of sequence or planted",
            )?,
            AdversarySpec::EvenSplit => needs(
                experts && self.class.budget() == 0,
                "a realizable experts class",
            )?,
            AdversarySpec::BudgetLabel => needs(
                experts && class.hypothesis_count() == class.label_count(),
                "an experts class with n = k",
            )?,
            AdversarySpec::RandomTarget => needs(
                experts
                    && self.class.budget() == 0
                    && power_of(class.hypothesis_count(), class.label_count()).is_some(),
                "a realizable experts class with n a power of k",
            )?,
            AdversarySpec::Geometric => needs(
                (experts && class.hypothesis_count() == class.label_count())
                    || matches!(self.class, ClassSpec::Constant { domain: 1, .. }),
                "an experts class with n = k or a constant class on one point",
            )?,
            AdversarySpec::Hdk | AdversarySpec::HdkFullinfo => needs(
                matches!(class.kind(), ClassKind::Hdk { .. }) && self.class.budget() == 0,
                "a realizable H(d,k) class",
            )?,
            AdversarySpec::ValueOptimal { .. } => {}
        }
        Ok(())
    }
}

/// `m` with `k^m = n`, if any.
pub(crate) fn power_of(n: usize, k: usize) -> Option<usize> {
    let mut m = 0;
    let mut p = 1usize;
    while p < n {
        p = p.checked_mul(k)?;
        m += 1;
    }
    (p == n).then_some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "id": "wp-even-split",
        "mode": "bandit",
        "class": {"kind": "experts", "n": 8, "k": 2},
        "learner": {"name": "weighted_plurality"},
        "adversary": {"name": "even_split"},
        "horizon": 50,
        "trials": 1,
        "seed": 7,
        "bound": "weighted_plurality"
    }"#;

    #[test]
    fn parses_single_scenario() {
        let s = parse_scenarios(EXAMPLE).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(
            s[0].learner,
            LearnerSpec::WeightedPlurality {
                alpha: AlphaSpec::default()
            }
        );
        assert_eq!(s[0].slack, DEFAULT_SLACK);
    }

    #[test]
    fn parses_arrays_and_reports_positions() {
        let two = format!("[{EXAMPLE}, {EXAMPLE}]");
        assert_eq!(parse_scenarios(&two).unwrap().len(), 2);
        let err = parse_scenarios("{\n  \"id\": 3,,\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn seed_is_mandatory() {
        let text = EXAMPLE.replace("\"seed\": 7,", "");
        assert!(parse_scenarios(&text).is_err());
    }

    #[test]
    fn mismatched_adversary_is_rejected() {
        let text = EXAMPLE.replace("even_split", "hdk");
        assert!(matches!(parse_scenarios(&text), Err(Error::Config(_))));
    }

    #[test]
    fn powers() {
        assert_eq!(power_of(9, 3), Some(2));
        assert_eq!(power_of(1, 3), Some(0));
        assert_eq!(power_of(10, 3), None);
    }
}
