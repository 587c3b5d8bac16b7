use std::sync::Arc;

use crate::classes::{BudgetedVersionSpace, ConceptClass, Instance, Transcript};
use crate::dist::{Label, LabelDistribution};
use crate::engine::{Adversary, ConsistencyCertificate, RoundAudit};
use crate::error::Result;

use super::{certify, require_point_mass};

/// Realizable experts adversary against deterministic learners.
///
/// While more than `k` experts are alive it deals the alive experts out to
/// the labels round-robin and tells the learner it was wrong. Each such
/// round removes only the experts on the predicted label, at most
/// `ceil(n_t / k)` of them. When `k` or fewer remain it commits to the
/// lowest-indexed survivor and answers truthfully.
#[derive(Debug, Clone)]
pub struct EvenSplitEliminator {
    k: usize,
    vs: BudgetedVersionSpace,
    target: Option<usize>,
    alive_history: Vec<usize>,
    scripted_rounds: usize,
}

impl EvenSplitEliminator {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let class = Arc::new(ConceptClass::experts(n, k)?);
        let vs = BudgetedVersionSpace::uniform(class, 0);
        Ok(EvenSplitEliminator {
            k,
            alive_history: vec![vs.alive_count()],
            vs,
            target: None,
            scripted_rounds: 0,
        })
    }

    /// The declared realizable experts game.
    pub fn declared(&self) -> &BudgetedVersionSpace {
        &self.vs
    }

    /// Alive counts at the start and after every round.
    pub fn alive_history(&self) -> &[usize] {
        &self.alive_history
    }

    /// Rounds played while more than `k` experts were alive.
    pub fn scripted_rounds(&self) -> usize {
        self.scripted_rounds
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    fn scripted(&self) -> bool {
        self.target.is_none() && self.vs.alive_count() > self.k
    }

    fn profile(&self) -> Vec<Label> {
        let mut p = vec![0; self.vs.class().hypothesis_count()];
        for (j, h) in self.vs.alive().enumerate() {
            p[h] = j % self.k;
        }
        p
    }
}

impl Adversary for EvenSplitEliminator {
    fn name(&self) -> String {
        "even_split".into()
    }

    fn next_instance(&mut self, _round: usize) -> Result<Option<Instance>> {
        if !self.scripted() && self.target.is_none() {
            self.target = self.vs.alive().next();
        }
        Ok(Some(Instance::Profile(self.profile())))
    }

    fn choose_target(
        &mut self,
        round: usize,
        x: &Instance,
        pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        let class = self.vs.class();
        if let Some(h) = self.target {
            return Ok(LabelDistribution::point(self.k, class.predict(h, x)));
        }
        let yhat = require_point_mass(pi, round)?;
        // Every label has an alive expert, so any other label is realizable.
        let y = if yhat == 0 { 1 } else { 0 };
        Ok(LabelDistribution::point(self.k, y))
    }

    fn observe(&mut self, audit: &RoundAudit) -> Result<()> {
        if self.target.is_none() {
            self.scripted_rounds += 1;
        }
        self.vs = self.vs.apply(&audit.record());
        self.alive_history.push(self.vs.alive_count());
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        let h = self.target.or_else(|| self.vs.alive().next())?;
        Some(certify(self.vs.class(), h, 0, transcript))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_bandit_game;
    use crate::learners::FixedLabelLearner;

    #[test]
    fn survivors_shrink_by_at_most_two_over_k() {
        let mut adv = EvenSplitEliminator::new(27, 3).unwrap();
        let vs = adv.declared().clone();
        let mut learner = FixedLabelLearner::new(3, 0);
        let run = run_bandit_game(&vs, &mut learner, &mut adv, 40, 0).unwrap();
        let hist = adv.alive_history();
        for w in hist.windows(2).take(adv.scripted_rounds()) {
            assert!(w[1] as f64 >= (1.0 - 2.0 / 3.0) * w[0] as f64);
        }
        assert!(adv.scripted_rounds() >= 2);
        assert!(run.mistakes >= adv.scripted_rounds());
        assert_eq!(run.certificate.unwrap().inconsistencies, 0);
    }

    #[test]
    fn refuses_randomized_learner_while_scripted() {
        let mut adv = EvenSplitEliminator::new(8, 2).unwrap();
        let vs = adv.declared().clone();
        let mut learner = crate::learners::UniformLearner::new(2);
        assert!(run_bandit_game(&vs, &mut learner, &mut adv, 5, 0).is_err());
    }
}
