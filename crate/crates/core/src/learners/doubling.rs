use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::{contradicts, ConceptClass, FeedbackRecord, Instance};
use crate::dist::LabelDistribution;
use crate::engine::Learner;
use crate::error::{Error, Result};

/// Builds a fresh inner learner for an integer budget guess.
pub type InnerFactory = dyn Fn(u32) -> Result<Box<dyn Learner>> + Send + Sync;

/// What happened during one guess of the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub guess: f64,
    pub rounds: usize,
    pub mistakes: usize,
    /// Best hypothesis inconsistency over the epoch's rounds.
    pub best_inconsistency: u32,
}

/// Doubling wrapper for learners that need a budget bound.
///
/// Starts with the guess `r_M = d2`. It tracks, for the current epoch only,
/// how often each hypothesis of `class` contradicts the feedback. Once every
/// hypothesis exceeds `r_M`, the guess doubles and the inner learner is
/// rebuilt from scratch with budget `floor(r_M)`.
pub struct DoublingTrick {
    make_inner: Arc<InnerFactory>,
    class: Arc<ConceptClass>,
    d1: f64,
    d2: f64,
    guess: f64,
    inner: Box<dyn Learner>,
    counts: Vec<u32>,
    epochs: Vec<EpochSummary>,
}

impl DoublingTrick {
    pub fn new(
        make_inner: Arc<InnerFactory>,
        d1: f64,
        d2: f64,
        class: Arc<ConceptClass>,
    ) -> Result<Self> {
        if !(d1 >= 1.0 && d2 >= 1.0) {
            return Err(Error::Config(format!("need d1, d2 >= 1, got {d1}, {d2}")));
        }
        let inner = make_inner(d2.floor() as u32)?;
        let n = class.hypothesis_count();
        Ok(DoublingTrick {
            make_inner,
            class,
            d1,
            d2,
            guess: d2,
            inner,
            counts: vec![0; n],
            epochs: vec![EpochSummary {
                guess: d2,
                rounds: 0,
                mistakes: 0,
                best_inconsistency: 0,
            }],
        })
    }

    /// `10 d1 (r* + d2)`.
    pub fn mistake_bound(&self, r_star: u32) -> f64 {
        10.0 * self.d1 * (r_star as f64 + self.d2)
    }

    /// `2 d1 d2`, valid when `r* <= d2`.
    pub fn small_budget_bound(&self) -> f64 {
        2.0 * self.d1 * self.d2
    }

    pub fn epochs(&self) -> &[EpochSummary] {
        &self.epochs
    }

    pub fn guess(&self) -> f64 {
        self.guess
    }
}

impl Learner for DoublingTrick {
    fn name(&self) -> String {
        format!("dt({})", self.inner.name())
    }

    fn predict(&mut self, x: &Instance) -> Result<LabelDistribution> {
        self.inner.predict(x)
    }

    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()> {
        self.inner.observe(feedback)?;
        for (h, c) in self.counts.iter_mut().enumerate() {
            if contradicts(&self.class, h, feedback) {
                *c += 1;
            }
        }
        let best = self.counts.iter().copied().min().unwrap_or(0);
        let epoch = self.epochs.last_mut().expect("at least one epoch");
        epoch.rounds += 1;
        if feedback.is_mistake() {
            epoch.mistakes += 1;
        }
        epoch.best_inconsistency = best;
        if best as f64 > self.guess {
            self.guess *= 2.0;
            self.inner = (self.make_inner)(self.guess.floor() as u32)?;
            self.counts.iter_mut().for_each(|c| *c = 0);
            self.epochs.push(EpochSummary {
                guess: self.guess,
                rounds: 0,
                mistakes: 0,
                best_inconsistency: 0,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        let class = Arc::new(ConceptClass::experts(2, 2).unwrap());
        let f: Arc<InnerFactory> =
            Arc::new(|_| Ok(Box::new(crate::learners::UniformLearner::new(2)) as Box<dyn Learner>));
        let dt = DoublingTrick::new(f, 1.0, 1.0, class).unwrap();
        assert_eq!(dt.mistake_bound(3), 40.0);
        assert_eq!(dt.small_budget_bound(), 2.0);
    }
}
