use crate::classes::{
    inconsistency_counts, BudgetedVersionSpace, FeedbackRecord, Instance, Op, Transcript,
};
use crate::dist::{Label, LabelDistribution};
use crate::engine::{Adversary, ConsistencyCertificate, RoundAudit};
use crate::error::{Error, Result};

use super::{argmin, certify};

/// Plays a labeled sequence fixed in advance, ignoring the learner.
///
/// The game ends when the sequence runs out.
#[derive(Debug, Clone)]
pub struct ObliviousSequence {
    k: usize,
    seq: Vec<(Instance, Label)>,
    witness: usize,
    budget: u32,
    class: std::sync::Arc<crate::classes::ConceptClass>,
}

impl ObliviousSequence {
    /// Fails with `SequenceNotRealizable` unless some hypothesis of
    /// `declared` disagrees with at most its budget of the labels.
    pub fn new(declared: &BudgetedVersionSpace, seq: Vec<(Instance, Label)>) -> Result<Self> {
        let class = declared.class().clone();
        let mut records = Vec::with_capacity(seq.len());
        for (x, y) in &seq {
            class.check_instance(x)?;
            class.check_label(*y)?;
            records.push(FeedbackRecord {
                instance: x.clone(),
                predicted: *y,
                op: Op::Correct,
                revealed: Some(*y),
            });
        }
        let counts = inconsistency_counts(&class, &records);
        let slack: Vec<i64> = counts
            .iter()
            .enumerate()
            .map(|(h, &c)| c as i64 - declared.initial_budget(h) as i64)
            .collect();
        let witness = argmin(&slack);
        if slack[witness] > 0 {
            return Err(Error::SequenceNotRealizable {
                found: counts[witness],
                budget: declared.initial_budget(witness),
            });
        }
        Ok(ObliviousSequence {
            k: class.label_count(),
            seq,
            witness,
            budget: declared.initial_budget(witness),
            class,
        })
    }

    /// The hypothesis chosen at construction to witness realizability.
    pub fn witness(&self) -> usize {
        self.witness
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }
}

impl Adversary for ObliviousSequence {
    fn name(&self) -> String {
        "oblivious".into()
    }

    fn next_instance(&mut self, round: usize) -> Result<Option<Instance>> {
        Ok(self.seq.get(round).map(|(x, _)| x.clone()))
    }

    fn choose_target(
        &mut self,
        round: usize,
        _x: &Instance,
        _pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        Ok(LabelDistribution::point(self.k, self.seq[round].1))
    }

    fn observe(&mut self, _audit: &RoundAudit) -> Result<()> {
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        Some(certify(&self.class, self.witness, self.budget, transcript))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::classes::ConceptClass;
    use crate::engine::run_bandit_game;
    use crate::learners::FixedLabelLearner;

    #[test]
    fn constant_sequence_against_always_right_learner() {
        let class = Arc::new(ConceptClass::constant(3, 2).unwrap());
        let vs = BudgetedVersionSpace::uniform(class, 0);
        let seq = vec![
            (Instance::Point(0), 2),
            (Instance::Point(1), 2),
            (Instance::Point(0), 2),
        ];
        let mut adv = ObliviousSequence::new(&vs, seq).unwrap();
        let mut learner = FixedLabelLearner::new(3, 2);
        let run = run_bandit_game(&vs, &mut learner, &mut adv, 10, 1).unwrap();
        assert_eq!(run.mistakes, 0);
        assert_eq!(run.rounds.len(), 3);
        let cert = run.certificate.unwrap();
        assert_eq!(cert.hypothesis, 2);
        assert_eq!(cert.inconsistencies, 0);
    }

    #[test]
    fn rejects_sequences_over_budget() {
        let class = Arc::new(ConceptClass::constant(2, 1).unwrap());
        let vs = BudgetedVersionSpace::uniform(class, 1);
        let x = Instance::Point(0);
        let seq = vec![(x.clone(), 0), (x.clone(), 1), (x.clone(), 0), (x, 1)];
        assert_eq!(
            ObliviousSequence::new(&vs, seq).unwrap_err(),
            Error::SequenceNotRealizable {
                found: 2,
                budget: 1
            }
        );
    }
}
