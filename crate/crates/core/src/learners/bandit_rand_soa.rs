use std::sync::Arc;

use crate::classes::{BudgetedVersionSpace, FeedbackRecord, Instance};
use crate::dist::LabelDistribution;
use crate::engine::Learner;
use crate::error::{Error, Result};
use crate::values::{GameSolver, RoundGame};

/// The minimax-optimal randomized bandit learner.
///
/// Each round it solves the round matrix game at the presented instance,
/// with continuation values taken at a fixed planning horizon (the
/// stabilization horizon of the starting state), and plays the learner's
/// optimal mix. It then restricts its state by the feedback.
pub struct BanditRandSoa {
    solver: Arc<GameSolver>,
    vs: BudgetedVersionSpace,
    horizon: u32,
}

impl BanditRandSoa {
    /// Plans with the stabilization horizon of `vs`.
    pub fn new(solver: Arc<GameSolver>, vs: BudgetedVersionSpace) -> Result<Self> {
        let horizon = solver.stabilized_value(&vs)?.horizon;
        Ok(Self::with_horizon(solver, vs, horizon))
    }

    /// Plans with continuation values at `horizon`.
    pub fn with_horizon(solver: Arc<GameSolver>, vs: BudgetedVersionSpace, horizon: u32) -> Self {
        BanditRandSoa {
            solver,
            vs,
            horizon,
        }
    }

    pub fn state(&self) -> &BudgetedVersionSpace {
        &self.vs
    }

    pub fn planning_horizon(&self) -> u32 {
        self.horizon
    }

    /// The round game the learner would solve at `x`.
    pub fn round_game(&self, x: &Instance) -> Result<RoundGame> {
        self.solver.round_game(&self.vs, x, self.horizon)
    }
}

impl Learner for BanditRandSoa {
    fn name(&self) -> String {
        "bandit_rand_soa".into()
    }

    fn predict(&mut self, x: &Instance) -> Result<LabelDistribution> {
        if !self.vs.is_realizable() {
            return Err(Error::Unrealizable);
        }
        Ok(self.round_game(x)?.learner)
    }

    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()> {
        self.vs = self.vs.apply(feedback);
        Ok(())
    }
}
