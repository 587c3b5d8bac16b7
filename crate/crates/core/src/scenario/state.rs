//! States for the `value` command.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ClassSpec;
use crate::classes::{expert_version_space, BudgetFunction, BudgetedVersionSpace, ExpertGameState};
use crate::engine::Mode;
use crate::error::{Error, Result};
use crate::values::{GameSolver, SolverConfig};

/// A game state, given either as an experts count vector or as a class with
/// optional per-hypothesis budgets.
///
/// ```json
/// {"counts": [0, 2], "k": 2}
/// {"class": {"kind": "hdk", "d": 1, "k": 2}, "mode": "full"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// `counts[i]` experts with budget `i`, over `k` labels.
    Counts {
        counts: Vec<u32>,
        k: usize,
        #[serde(default = "bandit")]
        mode: Mode,
    },
    /// A class; `budgets` overrides the class's uniform budget.
    Class {
        class: ClassSpec,
        #[serde(default)]
        budgets: Option<Vec<u32>>,
        #[serde(default = "bandit")]
        mode: Mode,
    },
}

fn bandit() -> Mode {
    Mode::Bandit
}

/// Value of a state, from both sides of the game where available.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateValue {
    pub state: String,
    pub mode: Mode,
    pub horizon: u32,
    pub value: f64,
    pub stabilized: bool,
    /// Value of the game where the adversary reveals first (bandit only).
    pub dual_value: Option<f64>,
    /// `|value - dual_value|`.
    pub duality_gap: Option<f64>,
    /// Largest duality gap of any matrix game solved on the way.
    pub lp_residual: f64,
}

impl StateSpec {
    /// Parses a state from JSON text, reporting the position of errors.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid state: {e}")))
    }

    pub fn mode(&self) -> Mode {
        match self {
            StateSpec::Counts { mode, .. } | StateSpec::Class { mode, .. } => *mode,
        }
    }

    fn describe(&self) -> String {
        match self {
            StateSpec::Counts { counts, k, .. } => ExpertGameState {
                m: counts.clone(),
                k: *k,
            }
            .to_string(),
            StateSpec::Class { class, budgets, .. } => match budgets {
                Some(b) => format!(
                    "{} budgets={b:?}",
                    serde_json::to_string(class).unwrap_or_default()
                ),
                None => serde_json::to_string(class).unwrap_or_default(),
            },
        }
    }

    /// The version space of the state, and its count vector for experts.
    pub fn version_space(&self) -> Result<(BudgetedVersionSpace, Option<ExpertGameState>)> {
        match self {
            StateSpec::Counts { counts, k, .. } => {
                let m = ExpertGameState::new(counts.clone(), *k)?;
                if m.is_empty() {
                    return Err(Error::Unrealizable);
                }
                Ok((expert_version_space(&m)?, Some(m)))
            }
            StateSpec::Class { class, budgets, .. } => {
                let c = class.build()?;
                let vs = match budgets {
                    Some(b) => BudgetedVersionSpace::new(c, BudgetFunction::new(b.clone()))?,
                    None => BudgetedVersionSpace::uniform(c, class.budget()),
                };
                if !vs.is_realizable() {
                    return Err(Error::Unrealizable);
                }
                Ok((vs, None))
            }
        }
    }

    /// Evaluates the state at `horizon`, or stabilized when `None`.
    ///
    /// With `with_dual` the bandit value is recomputed in the dual game over
    /// the full version space, which is much slower than the count
    /// recursion for large expert states.
    pub fn evaluate(&self, horizon: Option<u32>, with_dual: bool) -> Result<StateValue> {
        let (vs, counts) = self.version_space()?;
        let solver = GameSolver::new(Arc::clone(vs.class()), SolverConfig::default());
        let mode = self.mode();
        let primal = match (mode, horizon, &counts) {
            (Mode::Bandit, Some(t), Some(m)) => solver.expert_state_value(m, t)?,
            (Mode::Bandit, Some(t), None) => solver.primal_value(&vs, t)?,
            (Mode::Bandit, None, Some(m)) => solver.stabilized_expert_value(m)?,
            (Mode::Bandit, None, None) => solver.stabilized_value(&vs)?,
            (Mode::Full, Some(t), _) => solver.full_rand_value(&vs, t)?,
            (Mode::Full, None, _) => solver.opt_full_rand(&vs)?,
        };
        let dual_value = match mode {
            Mode::Bandit if with_dual => Some(solver.dual_value(&vs, primal.horizon)?.value),
            _ => None,
        };
        Ok(StateValue {
            state: self.describe(),
            mode,
            horizon: primal.horizon,
            value: primal.value,
            stabilized: primal.stabilized,
            dual_value,
            duality_gap: dual_value.map(|d| (primal.value - d).abs()),
            lp_residual: solver.max_residual(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_expert_is_free() {
        let v = StateSpec::parse(r#"{"counts": [1], "k": 2}"#)
            .unwrap()
            .evaluate(None, true)
            .unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.dual_value, Some(0.0));
    }

    #[test]
    fn two_experts_two_labels() {
        let v = StateSpec::parse(r#"{"class": {"kind": "experts", "n": 2, "k": 2}}"#)
            .unwrap()
            .evaluate(None, true)
            .unwrap();
        assert!((v.value - 0.5).abs() < 1e-12);
        assert!(v.stabilized);
        assert!(v.duality_gap.unwrap() < 1e-9);
    }

    #[test]
    fn empty_state_is_unrealizable() {
        let r = StateSpec::parse(r#"{"counts": [0, 0], "k": 2}"#)
            .unwrap()
            .evaluate(None, true);
        assert_eq!(r.unwrap_err(), Error::Unrealizable);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = StateSpec::parse("{\n \"counts\": [1,").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
