use std::sync::Arc;

use crate::classes::{BudgetedVersionSpace, ConceptClass, Instance, Transcript};
use crate::dist::LabelDistribution;
use crate::engine::{Adversary, ConsistencyCertificate, RoundAudit};
use crate::error::{Error, Result};

use super::{argmin, certify, identity_profile, require_point_mass};

/// Forces `k(r+1) - 1` mistakes on any deterministic bandit learner.
///
/// There are `k` experts and expert `i` always predicts `i`. For the first
/// `k(r+1) - 1` rounds every prediction is declared wrong; the label the
/// learner used least is then predicted at most `r` times, so its expert
/// stays within budget. The true label of a scripted round is the other
/// label with the fewest predictions so far, which keeps every prefix
/// realizable.
#[derive(Debug, Clone)]
pub struct BudgetLabelAdversary {
    k: usize,
    r: u32,
    counts: Vec<u32>,
    played: usize,
    class: Arc<ConceptClass>,
}

impl BudgetLabelAdversary {
    pub fn new(k: usize, r: u32) -> Result<Self> {
        Ok(BudgetLabelAdversary {
            k,
            r,
            counts: vec![0; k],
            played: 0,
            class: Arc::new(ConceptClass::experts(k, k)?),
        })
    }

    /// `k` experts with uniform budget `r`.
    pub fn declared(&self) -> BudgetedVersionSpace {
        BudgetedVersionSpace::uniform(self.class.clone(), self.r)
    }

    /// Length of the all-negative phase.
    pub fn scripted_horizon(&self) -> usize {
        self.k * (self.r as usize + 1) - 1
    }

    /// How often each label was predicted in the scripted phase.
    pub fn prediction_counts(&self) -> &[u32] {
        &self.counts
    }

    /// The least-predicted label, whose expert certifies the transcript.
    pub fn least_predicted(&self) -> usize {
        argmin(&self.counts)
    }
}

impl Adversary for BudgetLabelAdversary {
    fn name(&self) -> String {
        "budget_label".into()
    }

    fn next_instance(&mut self, _round: usize) -> Result<Option<Instance>> {
        Ok(Some(identity_profile(self.k)))
    }

    fn choose_target(
        &mut self,
        round: usize,
        _x: &Instance,
        pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        if self.played >= self.scripted_horizon() {
            return Ok(LabelDistribution::point(self.k, self.least_predicted()));
        }
        let yhat = require_point_mass(pi, round)?;
        let y = (0..self.k)
            .filter(|&y| y != yhat)
            .min_by_key(|&y| (self.counts[y], y))
            .ok_or_else(|| Error::Config("budget_label needs k >= 2".into()))?;
        Ok(LabelDistribution::point(self.k, y))
    }

    fn observe(&mut self, audit: &RoundAudit) -> Result<()> {
        if self.played < self.scripted_horizon() {
            self.counts[audit.predicted] += 1;
        }
        self.played += 1;
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        Some(certify(
            &self.class,
            self.least_predicted(),
            self.r,
            transcript,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_bandit_game;
    use crate::learners::FixedLabelLearner;

    #[test]
    fn forces_k_times_r_plus_one_minus_one() {
        let mut adv = BudgetLabelAdversary::new(3, 1).unwrap();
        let vs = adv.declared();
        let mut learner = FixedLabelLearner::new(3, 1);
        let run = run_bandit_game(&vs, &mut learner, &mut adv, 5, 0).unwrap();
        assert_eq!(run.mistakes, 5);
        let cert = run.certificate.unwrap();
        assert!(cert.inconsistencies <= 1);
    }

    #[test]
    fn single_round_for_k2_r0() {
        let adv = BudgetLabelAdversary::new(2, 0).unwrap();
        assert_eq!(adv.scripted_horizon(), 1);
    }
}
