use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ConceptClass, FeedbackRecord, Instance, Op};
use crate::dist::Label;
use crate::error::{Error, Result};

/// Per-hypothesis inconsistency budget `B(h)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BudgetFunction(Vec<u32>);

impl BudgetFunction {
    /// `B_r`: budget `r` for each of `hypotheses` hypotheses.
    pub fn uniform(hypotheses: usize, r: u32) -> Self {
        BudgetFunction(vec![r; hypotheses])
    }

    pub fn new(budgets: Vec<u32>) -> Self {
        BudgetFunction(budgets)
    }

    pub fn get(&self, h: usize) -> u32 {
        self.0[h]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Marker for a dead hypothesis in the residual vector.
const DEAD: u32 = u32::MAX;

/// Canonical memo key for a version space.
///
/// Experts are interchangeable, so their key is the count vector `m`.
/// Tabulated classes use the residual vector itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKey {
    Experts(Vec<u32>),
    Budgets(Vec<u32>),
}

/// The alive hypotheses of a class together with their remaining budgets.
///
/// Restrictions return new values; dead hypotheses stay recorded as dead.
#[derive(Debug, Clone)]
pub struct BudgetedVersionSpace {
    class: Arc<ConceptClass>,
    initial: Arc<Vec<u32>>,
    residual: Vec<u32>,
}

impl PartialEq for BudgetedVersionSpace {
    fn eq(&self, other: &Self) -> bool {
        self.residual == other.residual
            && (Arc::ptr_eq(&self.class, &other.class) || self.class == other.class)
            && self.initial == other.initial
    }
}

impl Eq for BudgetedVersionSpace {}

impl BudgetedVersionSpace {
    /// Fresh space with budget function `budgets`.
    pub fn new(class: Arc<ConceptClass>, budgets: BudgetFunction) -> Result<Self> {
        if budgets.0.len() != class.hypothesis_count() {
            return Err(Error::InvalidClass(format!(
                "budget function has {} entries for {} hypotheses",
                budgets.0.len(),
                class.hypothesis_count()
            )));
        }
        if budgets.0.contains(&DEAD) {
            return Err(Error::InvalidClass("budget too large".into()));
        }
        let residual = budgets.0.clone();
        Ok(BudgetedVersionSpace {
            class,
            initial: Arc::new(budgets.0),
            residual,
        })
    }

    /// Fresh space where every hypothesis has budget `r`.
    pub fn uniform(class: Arc<ConceptClass>, r: u32) -> Self {
        let n = class.hypothesis_count();
        Self::new(class, BudgetFunction::uniform(n, r)).expect("uniform budgets are valid")
    }

    pub fn class(&self) -> &Arc<ConceptClass> {
        &self.class
    }

    pub fn initial_budget(&self, h: usize) -> u32 {
        self.initial[h]
    }

    pub fn max_initial_budget(&self) -> u32 {
        self.initial.iter().copied().max().unwrap_or(0)
    }

    /// Remaining budget of `h`, or `None` once it is dead.
    pub fn budget(&self, h: usize) -> Option<u32> {
        match self.residual[h] {
            DEAD => None,
            b => Some(b),
        }
    }

    pub fn is_alive(&self, h: usize) -> bool {
        self.residual[h] != DEAD
    }

    pub fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        self.residual
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != DEAD)
            .map(|(h, _)| h)
    }

    pub fn alive_count(&self) -> usize {
        self.residual.iter().filter(|&&b| b != DEAD).count()
    }

    pub fn is_realizable(&self) -> bool {
        self.residual.iter().any(|&b| b != DEAD)
    }

    /// Sum over alive hypotheses of `budget + 1`. Every state-changing
    /// restriction lowers it by at least one.
    pub fn progress_measure(&self) -> u64 {
        self.residual
            .iter()
            .filter(|&&b| b != DEAD)
            .map(|&b| b as u64 + 1)
            .sum()
    }

    fn penalize(&mut self, h: usize) {
        let b = &mut self.residual[h];
        if *b == 0 {
            *b = DEAD;
        } else if *b != DEAD {
            *b -= 1;
        }
    }

    /// Feedback "the label of `x` is `y`": every alive `h` with `h(x) != y`
    /// spends one unit of budget and dies when none is left.
    pub fn restrict_positive(&self, x: &Instance, y: Label) -> Self {
        let mut next = self.clone();
        for h in 0..self.residual.len() {
            if self.residual[h] != DEAD && self.class.predict(h, x) != y {
                next.penalize(h);
            }
        }
        next
    }

    /// Feedback "the label of `x` is not `yhat`": every alive `h` with
    /// `h(x) == yhat` spends one unit of budget.
    pub fn restrict_negative(&self, x: &Instance, yhat: Label) -> Self {
        let mut next = self.clone();
        for h in 0..self.residual.len() {
            if self.residual[h] != DEAD && self.class.predict(h, x) == yhat {
                next.penalize(h);
            }
        }
        next
    }

    /// Applies one feedback record. A record carrying the revealed label is
    /// treated as positive feedback on that label.
    pub fn apply(&self, record: &FeedbackRecord) -> Self {
        match (record.revealed, record.op) {
            (Some(y), _) => self.restrict_positive(&record.instance, y),
            (None, Op::Correct) => self.restrict_positive(&record.instance, record.predicted),
            (None, Op::Incorrect) => self.restrict_negative(&record.instance, record.predicted),
        }
    }

    /// Labels predicted by at least one alive hypothesis at `x`.
    pub fn predicted_labels(&self, x: &Instance) -> Vec<bool> {
        let mut seen = vec![false; self.class.label_count()];
        for h in self.alive() {
            seen[self.class.predict(h, x)] = true;
        }
        seen
    }

    /// Memo key, canonical up to relabeling of interchangeable experts.
    pub fn state_key(&self) -> StateKey {
        if self.class.is_experts() {
            let levels = self.max_initial_budget() as usize + 1;
            let mut m = vec![0u32; levels];
            for &b in &self.residual {
                if b != DEAD {
                    m[b as usize] += 1;
                }
            }
            StateKey::Experts(m)
        } else {
            StateKey::Budgets(self.residual.clone())
        }
    }

    /// Raw residual budgets, with `None` for dead hypotheses.
    pub fn residuals(&self) -> Vec<Option<u32>> {
        (0..self.residual.len()).map(|h| self.budget(h)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(k: usize, r: u32) -> BudgetedVersionSpace {
        BudgetedVersionSpace::uniform(Arc::new(ConceptClass::constant(k, 1).unwrap()), r)
    }

    #[test]
    fn consistent_hypothesis_is_untouched() {
        let c = Arc::new(ConceptClass::from_table(2, vec![vec![1]], None).unwrap());
        let vs = BudgetedVersionSpace::uniform(c, 0);
        let x = Instance::Point(0);
        assert_eq!(vs.restrict_positive(&x, 1), vs);
        assert!(!vs.restrict_positive(&x, 0).is_realizable());
        assert_eq!(vs.restrict_negative(&x, 0), vs);
    }

    #[test]
    fn positive_feedback_on_constant_class_with_budget_one() {
        let vs = constant(2, 1).restrict_positive(&Instance::Point(0), 0);
        assert_eq!(vs.budget(0), Some(1));
        assert_eq!(vs.budget(1), Some(0));
    }

    #[test]
    fn negative_feedback_kills_predictors_without_budget() {
        let vs = constant(2, 0).restrict_negative(&Instance::Point(0), 0);
        assert!(!vs.is_alive(0));
        assert!(vs.is_alive(1));
    }

    #[test]
    fn negative_feedback_on_experts_hits_only_predictors() {
        let c = Arc::new(ConceptClass::experts(3, 3).unwrap());
        let vs = BudgetedVersionSpace::uniform(c, 1);
        let next = vs.restrict_negative(&Instance::Profile(vec![0, 1, 2]), 1);
        assert_eq!(next.residuals(), vec![Some(1), Some(0), Some(1)]);
    }

    #[test]
    fn experts_key_counts_levels() {
        let c = Arc::new(ConceptClass::experts(3, 3).unwrap());
        let vs = BudgetedVersionSpace::uniform(c, 1);
        assert_eq!(vs.state_key(), StateKey::Experts(vec![0, 3]));
        let next = vs.restrict_negative(&Instance::Profile(vec![0, 1, 2]), 1);
        assert_eq!(next.state_key(), StateKey::Experts(vec![1, 2]));
    }

    #[test]
    fn full_info_record_restricts_positively() {
        let vs = constant(3, 0);
        let rec = FeedbackRecord {
            instance: Instance::Point(0),
            predicted: 0,
            op: Op::Incorrect,
            revealed: Some(2),
        };
        let next = vs.apply(&rec);
        assert_eq!(next.alive().collect::<Vec<_>>(), vec![2]);
    }
}
