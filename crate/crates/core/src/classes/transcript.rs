use serde::{Deserialize, Serialize};

use super::{BudgetFunction, ConceptClass, Instance};
use crate::dist::Label;

/// Bandit feedback signal: was the prediction right?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Correct,
    Incorrect,
}

/// What the learner sees at the end of a round.
///
/// `revealed` carries the true label in full-information games and is
/// always `None` in bandit games.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub instance: Instance,
    pub predicted: Label,
    pub op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revealed: Option<Label>,
}

impl FeedbackRecord {
    pub fn is_mistake(&self) -> bool {
        self.op == Op::Incorrect
    }
}

/// Ordered feedback records with a running mistake count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<FeedbackRecord>,
    pub mistakes: usize,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: FeedbackRecord) {
        if record.is_mistake() {
            self.mistakes += 1;
        }
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Does `record` contradict hypothesis `h`?
///
/// With a revealed label the test is `h(x) != y`. Otherwise a positive record
/// contradicts `h(x) != yhat` and a negative one contradicts `h(x) == yhat`.
pub fn contradicts(class: &ConceptClass, h: usize, record: &FeedbackRecord) -> bool {
    let p = class.predict(h, &record.instance);
    match (record.revealed, record.op) {
        (Some(y), _) => p != y,
        (None, Op::Correct) => p != record.predicted,
        (None, Op::Incorrect) => p == record.predicted,
    }
}

/// Number of contradicting records for every hypothesis.
pub fn inconsistency_counts(class: &ConceptClass, records: &[FeedbackRecord]) -> Vec<u32> {
    let mut counts = vec![0u32; class.hypothesis_count()];
    for rec in records {
        for (h, c) in counts.iter_mut().enumerate() {
            if contradicts(class, h, rec) {
                *c += 1;
            }
        }
    }
    counts
}

/// Smallest number of contradicting records over all hypotheses.
pub fn min_inconsistency(class: &ConceptClass, records: &[FeedbackRecord]) -> u32 {
    inconsistency_counts(class, records)
        .into_iter()
        .min()
        .unwrap_or(0)
}

/// Is there a hypothesis whose inconsistency count fits its budget?
pub fn is_realizable_under(
    class: &ConceptClass,
    budgets: &BudgetFunction,
    records: &[FeedbackRecord],
) -> bool {
    inconsistency_counts(class, records)
        .iter()
        .enumerate()
        .any(|(h, &c)| c <= budgets.get(h))
}
