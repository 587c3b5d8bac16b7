//! The round protocol and Monte-Carlo estimation.
//!
//! One round runs as follows:
//!
//! 1. the adversary presents an instance `x`,
//! 2. the learner reveals a distribution `pi` over labels,
//! 3. the adversary picks a distribution `tau` after seeing `pi`,
//! 4. the prediction `yhat ~ pi` is drawn and revealed,
//! 5. the true label `y ~ tau` is drawn and feedback is sent.
//!
//! In bandit games the learner only learns whether `yhat == y`.

mod montecarlo;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use montecarlo::{
    derive_seed, monte_carlo, run_trials, splitmix64, trial_seed, MonteCarloSummary,
};

use crate::classes::{BudgetedVersionSpace, FeedbackRecord, Instance, Op, Transcript};
use crate::dist::{Label, LabelDistribution};
use crate::error::{Error, Result};

/// Feedback model of a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Bandit,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Bandit => "bandit",
        })
    }
}

/// A learner strategy. It sees instances and its own feedback records only.
pub trait Learner: Send {
    fn name(&self) -> String;

    /// Distribution over labels for instance `x`.
    fn predict(&mut self, x: &Instance) -> Result<LabelDistribution>;

    /// Feedback for the round just played.
    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()>;
}

/// Everything that happened in a round, as seen by the adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAudit {
    pub round: usize,
    pub mode: Mode,
    pub instance: Instance,
    pub pi: LabelDistribution,
    pub tau: LabelDistribution,
    pub predicted: Label,
    pub truth: Label,
    pub op: Op,
}

impl RoundAudit {
    /// The feedback record the learner received this round.
    pub fn record(&self) -> FeedbackRecord {
        FeedbackRecord {
            instance: self.instance.clone(),
            predicted: self.predicted,
            op: self.op,
            revealed: match self.mode {
                Mode::Full => Some(self.truth),
                Mode::Bandit => None,
            },
        }
    }
}

/// Certificate that a transcript stays within the declared budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyCertificate {
    /// Certifying hypothesis (expert index or table row).
    pub hypothesis: usize,
    /// Contradicting records of that hypothesis.
    pub inconsistencies: u32,
    /// Declared budget.
    pub budget: u32,
}

/// An adversary strategy.
pub trait Adversary: Send {
    fn name(&self) -> String;

    /// Instance for round `round`; `None` ends the game early.
    fn next_instance(&mut self, round: usize) -> Result<Option<Instance>>;

    /// Distribution of the true label after seeing the learner's `pi`.
    fn choose_target(
        &mut self,
        round: usize,
        x: &Instance,
        pi: &LabelDistribution,
    ) -> Result<LabelDistribution>;

    /// Outcome of the round.
    fn observe(&mut self, audit: &RoundAudit) -> Result<()>;

    /// A hypothesis witnessing weak realizability of `transcript`, when the
    /// strategy knows one.
    fn certificate(&self, _transcript: &Transcript) -> Option<ConsistencyCertificate> {
        None
    }
}

/// Result of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub mode: Mode,
    pub mistakes: usize,
    pub rounds: Vec<RoundAudit>,
    pub transcript: Transcript,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ConsistencyCertificate>,
}

/// Plays up to `horizon` rounds in the given mode.
///
/// `declared` is the budgeted class the adversary promised to respect; the
/// engine tracks it and fails with `AdversaryInconsistency` as soon as a
/// label in the support of `tau` would make the feedback unrealizable.
pub fn run_game(
    mode: Mode,
    declared: &BudgetedVersionSpace,
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    horizon: usize,
    seed: u64,
) -> Result<RunResult> {
    let class = declared.class().clone();
    let k = class.label_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs = declared.clone();
    let mut transcript = Transcript::new();
    let mut rounds = Vec::new();
    for t in 0..horizon {
        let Some(x) = adversary.next_instance(t)? else {
            break;
        };
        class.check_instance(&x)?;
        let pi = learner.predict(&x)?;
        check_dist(&pi, k, "learner")?;
        let tau = adversary.choose_target(t, &x, &pi)?;
        check_dist(&tau, k, "adversary")?;
        for y in tau.support() {
            if !vs.restrict_positive(&x, y).is_realizable() {
                return Err(Error::AdversaryInconsistency {
                    round: t,
                    detail: format!("label {y} at {x} is inconsistent with every hypothesis"),
                });
            }
        }
        let predicted = pi.sample(&mut rng);
        let truth = tau.sample(&mut rng);
        let op = if predicted == truth {
            Op::Correct
        } else {
            Op::Incorrect
        };
        let record = FeedbackRecord {
            instance: x.clone(),
            predicted,
            op,
            revealed: match mode {
                Mode::Full => Some(truth),
                Mode::Bandit => None,
            },
        };
        vs = vs.apply(&record);
        if !vs.is_realizable() {
            return Err(Error::AdversaryInconsistency {
                round: t,
                detail: "feedback emptied the version space".into(),
            });
        }
        learner.observe(&record)?;
        let audit = RoundAudit {
            round: t,
            mode,
            instance: x,
            pi,
            tau,
            predicted,
            truth,
            op,
        };
        adversary.observe(&audit)?;
        transcript.push(record);
        rounds.push(audit);
    }
    let certificate = adversary.certificate(&transcript);
    Ok(RunResult {
        seed,
        mode,
        mistakes: transcript.mistakes,
        rounds,
        transcript,
        certificate,
    })
}

/// Bandit game; see [`run_game`].
pub fn run_bandit_game(
    declared: &BudgetedVersionSpace,
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    horizon: usize,
    seed: u64,
) -> Result<RunResult> {
    run_game(Mode::Bandit, declared, learner, adversary, horizon, seed)
}

/// Full-information game; see [`run_game`].
pub fn run_full_info_game(
    declared: &BudgetedVersionSpace,
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    horizon: usize,
    seed: u64,
) -> Result<RunResult> {
    run_game(Mode::Full, declared, learner, adversary, horizon, seed)
}

fn check_dist(d: &LabelDistribution, k: usize, who: &str) -> Result<()> {
    if d.label_count() != k {
        return Err(Error::DistributionInvalid(format!(
            "{who} gave {} probabilities for {k} labels",
            d.label_count()
        )));
    }
    d.validate()
}
