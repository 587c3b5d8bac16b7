use serde::{Deserialize, Serialize};

use super::{BudgetedVersionSpace, StateKey};
use crate::error::{Error, Result};

/// Living experts counted per remaining budget: `m[i]` experts have budget `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpertGameState {
    pub m: Vec<u32>,
    pub k: usize,
}

impl ExpertGameState {
    pub fn new(m: Vec<u32>, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidClass(format!("need k >= 2, got {k}")));
        }
        if m.is_empty() {
            return Err(Error::InvalidClass(
                "count vector must have r+1 >= 1 entries".into(),
            ));
        }
        Ok(ExpertGameState { m, k })
    }

    /// `n` experts, all at budget `r`.
    pub fn fresh(n: u32, k: usize, r: u32) -> Self {
        let mut m = vec![0; r as usize + 1];
        m[r as usize] = n;
        ExpertGameState { m, k }
    }

    pub fn levels(&self) -> usize {
        self.m.len()
    }

    pub fn total(&self) -> u32 {
        self.m.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// `W(m) = sum_i m_i k^(2i)`, exact. `None` on overflow.
    pub fn potential(&self) -> Option<u128> {
        let k2 = (self.k as u128).checked_mul(self.k as u128)?;
        let mut pow: u128 = 1;
        let mut acc: u128 = 0;
        for (i, &c) in self.m.iter().enumerate() {
            if i > 0 {
                pow = pow.checked_mul(k2)?;
            }
            acc = acc.checked_add(pow.checked_mul(c as u128)?)?;
        }
        Some(acc)
    }

    /// Memo key. Trailing zero levels are kept.
    pub fn key(&self) -> StateKey {
        StateKey::Experts(self.m.clone())
    }
}

impl std::fmt::Display for ExpertGameState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.m.iter().map(|c| c.to_string()).collect();
        write!(f, "m=({}) k={}", parts.join(","), self.k)
    }
}

/// Counts the alive experts of `vs` per residual budget.
pub fn expert_state_of(vs: &BudgetedVersionSpace) -> Result<ExpertGameState> {
    if !vs.class().is_experts() {
        return Err(Error::InvalidClass("not an experts class".into()));
    }
    match vs.state_key() {
        StateKey::Experts(m) => Ok(ExpertGameState {
            m,
            k: vs.class().label_count(),
        }),
        StateKey::Budgets(_) => unreachable!("experts classes produce experts keys"),
    }
}

/// A version space realizing the count vector `m`: one expert per unit of
/// `m[i]`, with budget `i`, in order of increasing budget. The experts class
/// may have fewer experts than labels.
pub fn expert_version_space(m: &ExpertGameState) -> Result<BudgetedVersionSpace> {
    let budgets: Vec<u32> =
        m.m.iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i as u32, c as usize))
            .collect();
    let class = std::sync::Arc::new(super::ConceptClass::experts_unchecked(budgets.len(), m.k));
    BudgetedVersionSpace::new(class, super::BudgetFunction::new(budgets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{ConceptClass, Instance};
    use std::sync::Arc;

    #[test]
    fn fresh_states() {
        let c = Arc::new(ConceptClass::experts(4, 2).unwrap());
        let vs = BudgetedVersionSpace::uniform(c, 0);
        assert_eq!(expert_state_of(&vs).unwrap().m, vec![4]);
        let c = Arc::new(ConceptClass::experts(2, 2).unwrap());
        let vs = BudgetedVersionSpace::uniform(c, 2);
        assert_eq!(expert_state_of(&vs).unwrap().m, vec![0, 0, 2]);
        let c = Arc::new(ConceptClass::experts(3, 2).unwrap());
        let vs = BudgetedVersionSpace::uniform(c, 1);
        assert_eq!(expert_state_of(&vs).unwrap().m, vec![0, 3]);
    }

    #[test]
    fn negative_moves_one_level_down() {
        let c = Arc::new(ConceptClass::experts(2, 2).unwrap());
        let vs = BudgetedVersionSpace::uniform(c, 1);
        let next = vs.restrict_negative(&Instance::Profile(vec![0, 1]), 0);
        assert_eq!(expert_state_of(&next).unwrap().m, vec![1, 1]);
    }

    #[test]
    fn version_space_of_counts() {
        let vs = expert_version_space(&ExpertGameState::new(vec![1, 2], 3).unwrap()).unwrap();
        assert_eq!(vs.class().hypothesis_count(), 3);
        assert_eq!(vs.class().label_count(), 3);
        assert_eq!(expert_state_of(&vs).unwrap().m, vec![1, 2]);
    }

    #[test]
    fn potential_is_exact() {
        let s = ExpertGameState::new(vec![1, 2, 3], 3).unwrap();
        assert_eq!(s.potential(), Some(1 + 2 * 9 + 3 * 81));
        assert_eq!(ExpertGameState::fresh(1, 2, 1).potential(), Some(4));
    }

    #[test]
    fn rejects_non_experts() {
        let c = Arc::new(ConceptClass::constant(2, 1).unwrap());
        assert!(expert_state_of(&BudgetedVersionSpace::uniform(c, 0)).is_err());
    }
}
