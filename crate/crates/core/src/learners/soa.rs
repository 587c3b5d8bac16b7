use std::sync::Arc;

use crate::classes::{BudgetedVersionSpace, FeedbackRecord, Instance};
use crate::dist::{Label, LabelDistribution};
use crate::engine::{Learner, Mode};
use crate::error::Result;
use crate::values::{DetMode, DetSolver};

/// A deterministic learner driven by full-information examples, as needed
/// by the bandit reduction (one copy runs per leaf of its guess tree).
pub trait FullInfoLearner: Send {
    fn predict_label(&mut self, x: &Instance) -> Result<Label>;

    /// Learns that the label of `x` is `y`.
    fn update(&mut self, x: &Instance, y: Label) -> Result<()>;

    fn boxed_clone(&self) -> Box<dyn FullInfoLearner>;
}

/// Value-greedy deterministic learner: predicts the label whose worst-case
/// continuation under exact deterministic values is smallest.
#[derive(Clone)]
pub struct Soa {
    solver: Arc<DetSolver>,
    vs: BudgetedVersionSpace,
}

impl Soa {
    pub fn new(solver: Arc<DetSolver>, vs: BudgetedVersionSpace) -> Self {
        Soa { solver, vs }
    }

    pub fn state(&self) -> &BudgetedVersionSpace {
        &self.vs
    }
}

impl FullInfoLearner for Soa {
    fn predict_label(&mut self, x: &Instance) -> Result<Label> {
        if !self.vs.is_realizable() {
            // A contradicted guess sequence; any label will do.
            return Ok(0);
        }
        self.solver.greedy_prediction(&self.vs, x, DetMode::Full)
    }

    fn update(&mut self, x: &Instance, y: Label) -> Result<()> {
        self.vs = self.vs.restrict_positive(x, y);
        Ok(())
    }

    fn boxed_clone(&self) -> Box<dyn FullInfoLearner> {
        Box::new(self.clone())
    }
}

/// [`Soa`] as a game learner. With full information it restricts by the
/// revealed label; with bandit feedback it predicts greedily under the
/// bandit values and restricts by the feedback record.
pub struct SoaLearner {
    solver: Arc<DetSolver>,
    vs: BudgetedVersionSpace,
    mode: Mode,
}

impl SoaLearner {
    pub fn new(solver: Arc<DetSolver>, vs: BudgetedVersionSpace, mode: Mode) -> Self {
        SoaLearner { solver, vs, mode }
    }
}

impl Learner for SoaLearner {
    fn name(&self) -> String {
        "soa".into()
    }

    fn predict(&mut self, x: &Instance) -> Result<LabelDistribution> {
        let k = self.vs.class().label_count();
        if !self.vs.is_realizable() {
            return Ok(LabelDistribution::point(k, 0));
        }
        let mode = match self.mode {
            Mode::Full => DetMode::Full,
            Mode::Bandit => DetMode::Bandit,
        };
        let y = self.solver.greedy_prediction(&self.vs, x, mode)?;
        Ok(LabelDistribution::point(k, y))
    }

    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()> {
        self.vs = self.vs.apply(feedback);
        Ok(())
    }
}
