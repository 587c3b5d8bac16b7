//! Exact values of the games against deterministic learners.
//!
//! These games have no horizon: values are least fixed points of the
//! recursion below, computed on strictly smaller states. A round whose
//! outcome leaves the state unchanged is handled directly: if it costs
//! nothing it is useless to the adversary, and if it costs a mistake the
//! adversary could repeat it forever, so the learner must avoid it.

use std::sync::Arc;

use dashmap::DashMap;

use super::GameValue;
use crate::classes::{BudgetedVersionSpace, ConceptClass, Instance, StateKey};
use crate::dist::Label;
use crate::error::{Error, Result};

/// Value with the two sentinels used by the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ext {
    NegInf,
    Fin(u32),
    PosInf,
}

/// Feedback model of a deterministic game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetMode {
    Full,
    Bandit,
}

/// Memoized solver for `opt_full^det` and `opt_bandit^det`.
pub struct DetSolver {
    class: Arc<ConceptClass>,
    state_cap: usize,
    profile_cap: usize,
    full: DashMap<StateKey, u32>,
    bandit: DashMap<StateKey, u32>,
    full_h: DashMap<(StateKey, u32), u32>,
    bandit_h: DashMap<(StateKey, u32), u32>,
}

impl std::fmt::Debug for DetSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DetSolver")
            .field("class", &self.class.kind())
            .field("full_states", &self.full.len())
            .field("bandit_states", &self.bandit.len())
            .finish()
    }
}

impl DetSolver {
    pub fn new(class: Arc<ConceptClass>, state_cap: usize) -> Self {
        DetSolver {
            class,
            state_cap,
            profile_cap: 1_000_000,
            full: DashMap::new(),
            bandit: DashMap::new(),
            full_h: DashMap::new(),
            bandit_h: DashMap::new(),
        }
    }

    pub fn class(&self) -> &Arc<ConceptClass> {
        &self.class
    }

    fn instances(&self, vs: &BudgetedVersionSpace) -> Result<Vec<Instance>> {
        if let Some(dom) = self.class.domain_size() {
            return Ok((0..dom).map(Instance::Point).collect());
        }
        let k = self.class.label_count();
        let alive: Vec<usize> = vs.alive().collect();
        let count = (k as f64).powi(alive.len() as i32);
        if count > self.profile_cap as f64 {
            return Err(Error::SizeCap(format!("{count} profiles")));
        }
        let n = self.class.hypothesis_count();
        let mut out = Vec::new();
        let mut digits = vec![0usize; alive.len()];
        loop {
            let mut p = vec![0; n];
            for (j, &h) in alive.iter().enumerate() {
                p[h] = digits[j];
            }
            // Canonical only up to the order of alive experts; the memo
            // collapses symmetric states anyway.
            out.push(Instance::Profile(p));
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(out);
                }
                digits[i] += 1;
                if digits[i] < k {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    fn check(&self, vs: &BudgetedVersionSpace) -> Result<()> {
        if !vs.is_realizable() {
            return Err(Error::Unrealizable);
        }
        Ok(())
    }

    /// `opt_full^det(vs)`: worst-case mistakes of the best deterministic
    /// learner with full-information feedback, over unbounded horizons.
    pub fn opt_full_det(&self, vs: &BudgetedVersionSpace) -> Result<GameValue> {
        self.check(vs)?;
        let v = self.value(vs, DetMode::Full)?;
        Ok(exact(v, vs.progress_measure() as u32))
    }

    /// `opt_bandit^det(vs)`, likewise with bandit feedback.
    pub fn opt_bandit_det(&self, vs: &BudgetedVersionSpace) -> Result<GameValue> {
        self.check(vs)?;
        let v = self.value(vs, DetMode::Bandit)?;
        Ok(exact(v, vs.progress_measure() as u32))
    }

    /// Exact unbounded-horizon value in either mode.
    pub fn value(&self, vs: &BudgetedVersionSpace, mode: DetMode) -> Result<u32> {
        let memo = match mode {
            DetMode::Full => &self.full,
            DetMode::Bandit => &self.bandit,
        };
        let key = vs.state_key();
        if let Some(v) = memo.get(&key).map(|e| *e) {
            return Ok(v);
        }
        if memo.len() >= self.state_cap {
            return Err(Error::StateSpaceCap {
                cap: self.state_cap,
            });
        }
        let mut best = 0u32;
        for x in self.instances(vs)? {
            if let Ext::Fin(v) = self.instance_value(vs, &x, mode, &mut |c| self.value(c, mode))? {
                best = best.max(v);
            }
        }
        memo.insert(key, best);
        Ok(best)
    }

    /// Value of the round at `x` when continuation values come from `cont`:
    /// `min` over predictions of the worst realizable outcome.
    fn instance_value(
        &self,
        vs: &BudgetedVersionSpace,
        x: &Instance,
        mode: DetMode,
        cont: &mut dyn FnMut(&BudgetedVersionSpace) -> Result<u32>,
    ) -> Result<Ext> {
        let k = self.class.label_count();
        let mut best = Ext::PosInf;
        for yhat in 0..k {
            let w = self.prediction_value(vs, x, yhat, mode, cont)?;
            best = best.min(w);
        }
        Ok(best)
    }

    fn prediction_value(
        &self,
        vs: &BudgetedVersionSpace,
        x: &Instance,
        yhat: Label,
        mode: DetMode,
        cont: &mut dyn FnMut(&BudgetedVersionSpace) -> Result<u32>,
    ) -> Result<Ext> {
        let k = self.class.label_count();
        let mut worst = Ext::NegInf;
        match mode {
            DetMode::Full => {
                for y in 0..k {
                    let child = vs.restrict_positive(x, y);
                    if !child.is_realizable() {
                        continue;
                    }
                    let cost = u32::from(y != yhat);
                    let o = if child == *vs {
                        if cost == 0 {
                            Ext::NegInf
                        } else {
                            Ext::PosInf
                        }
                    } else {
                        Ext::Fin(cost + cont(&child)?)
                    };
                    worst = worst.max(o);
                }
            }
            DetMode::Bandit => {
                let pos = vs.restrict_positive(x, yhat);
                if pos.is_realizable() && pos != *vs {
                    worst = worst.max(Ext::Fin(cont(&pos)?));
                }
                let other = (0..k).any(|y| y != yhat && vs.restrict_positive(x, y).is_realizable());
                if other {
                    let neg = vs.restrict_negative(x, yhat);
                    let o = if neg == *vs {
                        Ext::PosInf
                    } else {
                        Ext::Fin(1 + cont(&neg)?)
                    };
                    worst = worst.max(o);
                }
            }
        }
        Ok(worst)
    }

    /// Prediction of the value-greedy learner at `x`: the label whose worst
    /// continuation is smallest (lowest label on ties).
    pub fn greedy_prediction(
        &self,
        vs: &BudgetedVersionSpace,
        x: &Instance,
        mode: DetMode,
    ) -> Result<Label> {
        self.check(vs)?;
        let k = self.class.label_count();
        let mut best = (Ext::PosInf, 0);
        for yhat in 0..k {
            let w = self.prediction_value(vs, x, yhat, mode, &mut |c| self.value(c, mode))?;
            if w < best.0 {
                best = (w, yhat);
            }
        }
        Ok(best.1)
    }

    /// Finite-horizon variant of [`value`](Self::value): the adversary has
    /// `horizon` rounds. Non-decreasing in the horizon and equal to the
    /// unbounded value once the horizon reaches the progress measure.
    pub fn value_at(&self, vs: &BudgetedVersionSpace, mode: DetMode, horizon: u32) -> Result<u32> {
        if horizon == 0 {
            return Ok(0);
        }
        let memo = match mode {
            DetMode::Full => &self.full_h,
            DetMode::Bandit => &self.bandit_h,
        };
        let key = (vs.state_key(), horizon);
        if let Some(v) = memo.get(&key).map(|e| *e) {
            return Ok(v);
        }
        if memo.len() >= self.state_cap {
            return Err(Error::StateSpaceCap {
                cap: self.state_cap,
            });
        }
        let k = self.class.label_count();
        let mut best = 0u32;
        for x in self.instances(vs)? {
            let mut inner = u32::MAX;
            for yhat in 0..k {
                let mut worst: Option<u32> = None;
                let outcomes: Vec<(BudgetedVersionSpace, u32)> = match mode {
                    DetMode::Full => (0..k)
                        .map(|y| (vs.restrict_positive(&x, y), u32::from(y != yhat)))
                        .filter(|(c, _)| c.is_realizable())
                        .collect(),
                    DetMode::Bandit => {
                        let mut o = Vec::new();
                        let pos = vs.restrict_positive(&x, yhat);
                        if pos.is_realizable() {
                            o.push((pos, 0));
                        }
                        if (0..k).any(|y| y != yhat && vs.restrict_positive(&x, y).is_realizable())
                        {
                            o.push((vs.restrict_negative(&x, yhat), 1));
                        }
                        o
                    }
                };
                for (c, cost) in outcomes {
                    let v = cost + self.value_at(&c, mode, horizon - 1)?;
                    worst = Some(worst.map_or(v, |w: u32| w.max(v)));
                }
                if let Some(w) = worst {
                    inner = inner.min(w);
                }
            }
            if inner != u32::MAX {
                best = best.max(inner);
            }
        }
        memo.insert(key, best);
        Ok(best)
    }
}

fn exact(v: u32, horizon: u32) -> GameValue {
    GameValue {
        value: v as f64,
        horizon,
        stabilized: true,
        tolerance: 0.0,
        lp_residual: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::DEFAULT_CLASS_CAP;

    fn solver(c: ConceptClass, r: u32) -> (BudgetedVersionSpace, DetSolver) {
        let c = Arc::new(c);
        (
            BudgetedVersionSpace::uniform(Arc::clone(&c), r),
            DetSolver::new(c, 1_000_000),
        )
    }

    #[test]
    fn singleton_is_zero() {
        let (vs, s) = solver(
            ConceptClass::from_table(2, vec![vec![1, 0]], None).unwrap(),
            0,
        );
        assert_eq!(s.opt_full_det(&vs).unwrap().value, 0.0);
        assert_eq!(s.opt_bandit_det(&vs).unwrap().value, 0.0);
    }

    #[test]
    fn hdk_one_two() {
        let (vs, s) = solver(ConceptClass::hdk(1, 2, DEFAULT_CLASS_CAP).unwrap(), 0);
        assert_eq!(s.opt_full_det(&vs).unwrap().value, 2.0);
        assert!(s.opt_bandit_det(&vs).unwrap().value >= 2.0);
    }

    #[test]
    fn constant_class_three_labels() {
        let (vs, s) = solver(ConceptClass::constant(3, 1).unwrap(), 0);
        assert_eq!(s.opt_full_det(&vs).unwrap().value, 1.0);
        assert_eq!(s.opt_bandit_det(&vs).unwrap().value, 2.0);
    }

    #[test]
    fn two_experts_bandit() {
        let (vs, s) = solver(ConceptClass::experts(2, 2).unwrap(), 0);
        assert_eq!(s.opt_bandit_det(&vs).unwrap().value, 1.0);
    }

    #[test]
    fn finite_horizon_reaches_the_fixed_point() {
        let (vs, s) = solver(ConceptClass::constant(2, 1).unwrap(), 1);
        let exact = s.value(&vs, DetMode::Bandit).unwrap();
        let h = vs.progress_measure() as u32;
        assert_eq!(s.value_at(&vs, DetMode::Bandit, h).unwrap(), exact);
        let exact = s.value(&vs, DetMode::Full).unwrap();
        assert_eq!(s.value_at(&vs, DetMode::Full, h).unwrap(), exact);
        for t in 0..h {
            assert!(
                s.value_at(&vs, DetMode::Full, t).unwrap()
                    <= s.value_at(&vs, DetMode::Full, t + 1).unwrap()
            );
        }
    }
}
