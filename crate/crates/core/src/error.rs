//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong while building classes, running games or
/// solving for values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid class parameters: {0}")]
    InvalidClass(String),

    #[error("class would have {size} hypotheses, above the cap of {cap}")]
    ClassSizeCap { size: u128, cap: usize },

    #[error("instance {0} is not in the domain of the class")]
    InstanceOutOfDomain(String),

    #[error("label {label} is outside the label set of size {count}")]
    LabelOutOfRange { label: usize, count: usize },

    #[error("the version space is empty (no hypothesis is consistent)")]
    Unrealizable,

    #[error("memo table exceeded the cap of {cap} states")]
    StateSpaceCap { cap: usize },

    #[error("exhaustive search exceeded its size guard: {0}")]
    SizeCap(String),

    #[error("matrix game solver failed: residual {residual:e} ({detail})")]
    SolverFailure { residual: f64, detail: String },

    #[error("value did not stabilize within horizon {cap} (last change {last_change:e})")]
    NoConvergence { cap: u32, last_change: f64 },

    #[error("invalid distribution: {0}")]
    DistributionInvalid(String),

    #[error("adversary broke weak realizability in round {round}: {detail}")]
    AdversaryInconsistency { round: usize, detail: String },

    #[error("adversary requires a deterministic learner but got a non-point-mass distribution in round {round}")]
    NonDeterministicLearner { round: usize },

    #[error("budget r = {0} must be even for this adversary")]
    OddBudget(u32),

    #[error("oblivious sequence is not realizable: best hypothesis has {found} inconsistencies, budget {budget}")]
    SequenceNotRealizable { found: u32, budget: u32 },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("lemma violated at beta = {beta}: {detail}")]
    LemmaViolation { beta: f64, detail: String },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
