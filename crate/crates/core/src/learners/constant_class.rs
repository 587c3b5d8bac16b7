use crate::classes::{FeedbackRecord, Instance, Op};
use crate::dist::{Label, LabelDistribution};
use crate::engine::Learner;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Phase {
    /// Uniform guessing; `correct[y]` counts correct guesses of label `y`.
    Explore { played: u32, correct: Vec<u32> },
    /// Committed to `label`; `mistakes` made since committing.
    Commit { label: Label, mistakes: u32 },
}

/// Two-phase randomized learner for the class of constant functions.
///
/// Phase one guesses uniformly for `16(k+r)` rounds. With at least
/// `8(k+r)/k` correct guesses it commits to the plurality label among them
/// (lowest label on ties); otherwise it explores again. Phase two predicts
/// the committed label and falls back to phase one after `r+1` mistakes.
#[derive(Debug, Clone)]
pub struct ConstantClassLearner {
    k: usize,
    r: u32,
    phase: Phase,
    explorations: u32,
}

impl ConstantClassLearner {
    pub fn new(k: usize, r: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("need k >= 2, got {k}")));
        }
        Ok(ConstantClassLearner {
            k,
            r,
            phase: Self::explore(k),
            explorations: 1,
        })
    }

    fn explore(k: usize) -> Phase {
        Phase::Explore {
            played: 0,
            correct: vec![0; k],
        }
    }

    /// Length of one exploration phase.
    pub fn phase_length(&self) -> u32 {
        16 * (self.k as u32 + self.r)
    }

    /// Label committed to, if in phase two.
    pub fn committed(&self) -> Option<Label> {
        match self.phase {
            Phase::Commit { label, .. } => Some(label),
            Phase::Explore { .. } => None,
        }
    }

    /// Number of exploration phases started so far.
    pub fn explorations(&self) -> u32 {
        self.explorations
    }
}

impl Learner for ConstantClassLearner {
    fn name(&self) -> String {
        "constant_two_phase".into()
    }

    fn predict(&mut self, _x: &Instance) -> Result<LabelDistribution> {
        Ok(match &self.phase {
            Phase::Explore { .. } => LabelDistribution::uniform(self.k),
            Phase::Commit { label, .. } => LabelDistribution::point(self.k, *label),
        })
    }

    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()> {
        let len = self.phase_length();
        let (k, r) = (self.k, self.r);
        match &mut self.phase {
            Phase::Explore { played, correct } => {
                *played += 1;
                if feedback.op == Op::Correct {
                    correct[feedback.predicted] += 1;
                }
                if *played >= len {
                    let total: u32 = correct.iter().sum();
                    // total >= 8(k+r)/k, compared in integers
                    if total as u64 * k as u64 >= 8 * (k as u64 + r as u64) {
                        let mut label = 0;
                        for y in 1..k {
                            if correct[y] > correct[label] {
                                label = y;
                            }
                        }
                        self.phase = Phase::Commit { label, mistakes: 0 };
                    } else {
                        self.phase = Self::explore(k);
                        self.explorations += 1;
                    }
                }
            }
            Phase::Commit { mistakes, .. } => {
                if feedback.op == Op::Incorrect {
                    *mistakes += 1;
                    if *mistakes > r {
                        self.phase = Self::explore(k);
                        self.explorations += 1;
                    }
                }
            }
        }
        Ok(())
    }
}
