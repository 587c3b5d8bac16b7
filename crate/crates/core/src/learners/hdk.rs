use std::collections::HashMap;

use crate::classes::{FeedbackRecord, Instance, Op};
use crate::dist::{Label, LabelDistribution};
use crate::engine::Learner;
use crate::error::{Error, Result};

/// Two-phase randomized learner for H(d,k) (labels `0..=k`, `0` special).
///
/// Instances with a confirmed label are predicted with that label. Before
/// any non-zero label is confirmed, other instances get `1/2` on label `0`
/// and `1/(2k)` on each positive label. After a non-zero label `y` is
/// confirmed, other instances get `y` until `y` is rejected on them, after
/// which they get `0`.
#[derive(Debug, Clone)]
pub struct HdkLearner {
    d: usize,
    k: usize,
    known: HashMap<Instance, Label>,
    positive: Option<Label>,
}

impl HdkLearner {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d < 1 || k < 2 {
            return Err(Error::Config(format!(
                "H(d,k) needs d >= 1, k >= 2; got {d}, {k}"
            )));
        }
        Ok(HdkLearner {
            d,
            k,
            known: HashMap::new(),
            positive: None,
        })
    }

    /// Expected-mistake bound `2(d+k)`.
    pub fn mistake_bound(&self) -> f64 {
        2.0 * (self.d + self.k) as f64
    }

    /// The phase-one mixture.
    pub fn exploration_mix(&self) -> LabelDistribution {
        let mut p = vec![1.0 / (2.0 * self.k as f64); self.k + 1];
        p[0] = 0.5;
        LabelDistribution::from_weights(&p).expect("valid mixture")
    }

    pub fn committed(&self) -> Option<Label> {
        self.positive
    }

    fn learn(&mut self, x: &Instance, y: Label) {
        self.known.insert(x.clone(), y);
        if y != 0 && self.positive.is_none() {
            self.positive = Some(y);
        }
    }
}

impl Learner for HdkLearner {
    fn name(&self) -> String {
        "hdk_two_phase".into()
    }

    fn predict(&mut self, x: &Instance) -> Result<LabelDistribution> {
        let labels = self.k + 1;
        if let Some(&y) = self.known.get(x) {
            return Ok(LabelDistribution::point(labels, y));
        }
        Ok(match self.positive {
            Some(y) => LabelDistribution::point(labels, y),
            None => self.exploration_mix(),
        })
    }

    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()> {
        match (feedback.revealed, feedback.op) {
            (Some(y), _) => self.learn(&feedback.instance, y),
            (None, Op::Correct) => self.learn(&feedback.instance, feedback.predicted),
            (None, Op::Incorrect) => {
                // Every hypothesis still consistent lies in H_y, so a
                // rejected `y` means the point is labeled 0.
                if self.positive == Some(feedback.predicted) {
                    self.known.insert(feedback.instance.clone(), 0);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exploration_mix_for_two_labels() {
        let l = HdkLearner::new(1, 2).unwrap();
        assert_eq!(l.exploration_mix().probs(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn confirmed_zero_is_remembered() {
        let mut l = HdkLearner::new(1, 2).unwrap();
        let x = Instance::Point(1);
        l.observe(&FeedbackRecord {
            instance: x.clone(),
            predicted: 0,
            op: Op::Correct,
            revealed: None,
        })
        .unwrap();
        assert_eq!(l.predict(&x).unwrap().as_point_mass(), Some(0));
        assert_eq!(l.committed(), None);
    }

    #[test]
    fn positive_feedback_commits() {
        let mut l = HdkLearner::new(1, 2).unwrap();
        l.observe(&FeedbackRecord {
            instance: Instance::Point(0),
            predicted: 2,
            op: Op::Correct,
            revealed: None,
        })
        .unwrap();
        assert_eq!(
            l.predict(&Instance::Point(1)).unwrap().as_point_mass(),
            Some(2)
        );
    }

    #[test]
    fn rejected_commitment_switches_to_zero() {
        let mut l = HdkLearner::new(1, 2).unwrap();
        let rec = |x: usize, predicted: Label, op: Op| FeedbackRecord {
            instance: Instance::Point(x),
            predicted,
            op,
            revealed: None,
        };
        l.observe(&rec(0, 1, Op::Correct)).unwrap();
        l.observe(&rec(1, 1, Op::Incorrect)).unwrap();
        assert_eq!(
            l.predict(&Instance::Point(1)).unwrap().as_point_mass(),
            Some(0)
        );
        assert_eq!(
            l.predict(&Instance::Point(2)).unwrap().as_point_mass(),
            Some(1)
        );
    }
}
