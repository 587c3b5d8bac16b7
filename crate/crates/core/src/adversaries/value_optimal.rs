use std::sync::Arc;

use crate::classes::{BudgetedVersionSpace, Instance, Transcript};
use crate::dist::LabelDistribution;
use crate::engine::{Adversary, ConsistencyCertificate, RoundAudit};
use crate::error::Result;
use crate::values::GameSolver;

use super::best_certificate;

/// The adversary of the bandit game value.
///
/// In round `t` of a game planned for `horizon` rounds it presents the
/// instance with the largest round value (continuations valued with
/// `horizon - t - 1` rounds left, earliest canonical instance on ties) and
/// answers the learner's mix with the maximin label distribution of that
/// round game. Past the planning horizon it keeps playing one-round games.
pub struct ValueOptimalAdversary {
    solver: Arc<GameSolver>,
    declared: BudgetedVersionSpace,
    vs: BudgetedVersionSpace,
    horizon: u32,
}

impl ValueOptimalAdversary {
    pub fn new(solver: Arc<GameSolver>, vs: BudgetedVersionSpace, horizon: u32) -> Self {
        ValueOptimalAdversary {
            solver,
            declared: vs.clone(),
            vs,
            horizon,
        }
    }

    /// Plans with the stabilization horizon of `vs`.
    pub fn stabilized(solver: Arc<GameSolver>, vs: BudgetedVersionSpace) -> Result<Self> {
        let horizon = solver.stabilized_value(&vs)?.horizon;
        Ok(Self::new(solver, vs, horizon))
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn state(&self) -> &BudgetedVersionSpace {
        &self.vs
    }

    fn cont(&self, round: usize) -> u32 {
        self.horizon.saturating_sub(round as u32 + 1)
    }
}

impl Adversary for ValueOptimalAdversary {
    fn name(&self) -> String {
        "value_optimal".into()
    }

    fn next_instance(&mut self, round: usize) -> Result<Option<Instance>> {
        let (x, _) = self.solver.best_instance(&self.vs, self.cont(round))?;
        Ok(Some(x))
    }

    fn choose_target(
        &mut self,
        round: usize,
        x: &Instance,
        _pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        Ok(self
            .solver
            .round_game(&self.vs, x, self.cont(round))?
            .adversary)
    }

    fn observe(&mut self, audit: &RoundAudit) -> Result<()> {
        self.vs = self.vs.apply(&audit.record());
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        Some(best_certificate(&self.declared, transcript))
    }
}
