//! Learner strategies.
//!
//! Every strategy implements [`Learner`](crate::engine::Learner). The
//! full-information learners used inside the bandit reduction additionally
//! implement [`FullInfoLearner`].

mod bandit_rand_soa;
mod constant_class;
mod doubling;
mod hdk;
mod reduction;
mod soa;
mod weighted_plurality;

pub use bandit_rand_soa::BanditRandSoa;
pub use constant_class::ConstantClassLearner;
pub use doubling::{DoublingTrick, EpochSummary, InnerFactory};
pub use hdk::HdkLearner;
pub use reduction::{ExpertsLearnerFactory, LeafView, ReductionLearner};
pub use soa::{FullInfoLearner, Soa, SoaLearner};
pub use weighted_plurality::{Alpha, WeightedPlurality};

use crate::classes::{FeedbackRecord, Instance};
use crate::dist::{Label, LabelDistribution};
use crate::engine::Learner;
use crate::error::Result;

/// Guesses uniformly at random every round.
#[derive(Debug, Clone)]
pub struct UniformLearner {
    k: usize,
}

impl UniformLearner {
    pub fn new(k: usize) -> Self {
        UniformLearner { k }
    }
}

impl Learner for UniformLearner {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn predict(&mut self, _x: &Instance) -> Result<LabelDistribution> {
        Ok(LabelDistribution::uniform(self.k))
    }

    fn observe(&mut self, _feedback: &FeedbackRecord) -> Result<()> {
        Ok(())
    }
}

/// Always predicts the same label.
#[derive(Debug, Clone)]
pub struct FixedLabelLearner {
    k: usize,
    label: Label,
}

impl FixedLabelLearner {
    pub fn new(k: usize, label: Label) -> Self {
        FixedLabelLearner { k, label }
    }
}

impl Learner for FixedLabelLearner {
    fn name(&self) -> String {
        format!("fixed{}", self.label)
    }

    fn predict(&mut self, _x: &Instance) -> Result<LabelDistribution> {
        Ok(LabelDistribution::point(self.k, self.label))
    }

    fn observe(&mut self, _feedback: &FeedbackRecord) -> Result<()> {
        Ok(())
    }
}
