use std::collections::BTreeSet;
use std::sync::Arc;

use crate::classes::{BudgetedVersionSpace, ClassKind, ConceptClass, Instance, Transcript};
use crate::dist::{Label, LabelDistribution};
use crate::engine::{Adversary, ConsistencyCertificate, RoundAudit};
use crate::error::{Error, Result};

use super::{certify, require_point_mass};

/// Index of the hypothesis `(y, zeros)` of an H(d,k) class.
fn find_hypothesis(class: &ConceptClass, y: Label, zeros: &BTreeSet<usize>) -> Option<usize> {
    let dom = class.domain_size()?;
    (0..class.hypothesis_count()).find(|&h| {
        (0..dom).all(|i| {
            let want = if zeros.contains(&i) { 0 } else { y };
            class.predict(h, &Instance::Point(i)) == want
        })
    })
}

fn hdk_class(d: usize, k: usize) -> Result<Arc<ConceptClass>> {
    Ok(Arc::new(ConceptClass::hdk(
        d,
        k,
        crate::classes::DEFAULT_CLASS_CAP,
    )?))
}

fn dk_of(class: &ConceptClass) -> Result<(usize, usize)> {
    match class.kind() {
        ClassKind::Hdk { d, k } => Ok((d, k)),
        other => Err(Error::InvalidClass(format!(
            "expected an H(d,k) class, got {other:?}"
        ))),
    }
}

/// Bandit adversary forcing `d k` mistakes on a deterministic learner.
///
/// Asks on `x_1, ..., x_{dk}` in order and always answers "wrong". Some
/// positive label `y*` is then predicted on a set `X'` of at most `d`
/// instances, and the hypothesis `(y*, X')` agrees with every answer.
/// Afterwards it cycles through the domain answering truthfully for that
/// hypothesis.
#[derive(Debug, Clone)]
pub struct HdkAdversary {
    d: usize,
    k: usize,
    class: Arc<ConceptClass>,
    vs: BudgetedVersionSpace,
    predictions: Vec<Label>,
    committed: Option<usize>,
}

impl HdkAdversary {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        Self::with_class(hdk_class(d, k)?)
    }

    /// Uses an already built H(d,k) class.
    pub fn with_class(class: Arc<ConceptClass>) -> Result<Self> {
        let (d, k) = dk_of(&class)?;
        Ok(HdkAdversary {
            d,
            k,
            vs: BudgetedVersionSpace::uniform(class.clone(), 0),
            class,
            predictions: Vec::new(),
            committed: None,
        })
    }

    pub fn declared(&self) -> BudgetedVersionSpace {
        BudgetedVersionSpace::uniform(self.class.clone(), 0)
    }

    pub fn scripted_horizon(&self) -> usize {
        self.d * self.k
    }

    /// The hypothesis `(y*, X')` for the predictions seen so far.
    pub fn witness(&self) -> Option<usize> {
        if let Some(h) = self.committed {
            return Some(h);
        }
        let mut counts = vec![0usize; self.k + 1];
        for &p in &self.predictions {
            counts[p] += 1;
        }
        let y_star = (1..=self.k).min_by_key(|&y| (counts[y], y))?;
        let zeros: BTreeSet<usize> = self
            .predictions
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == y_star)
            .map(|(i, _)| i)
            .collect();
        find_hypothesis(&self.class, y_star, &zeros)
    }
}

impl Adversary for HdkAdversary {
    fn name(&self) -> String {
        "hdk".into()
    }

    fn next_instance(&mut self, round: usize) -> Result<Option<Instance>> {
        if round >= self.scripted_horizon() && self.committed.is_none() {
            self.committed = self.witness();
        }
        Ok(Some(Instance::Point(round % self.scripted_horizon())))
    }

    fn choose_target(
        &mut self,
        round: usize,
        x: &Instance,
        pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        let labels = self.class.label_count();
        if let Some(h) = self.committed {
            return Ok(LabelDistribution::point(labels, self.class.predict(h, x)));
        }
        let yhat = require_point_mass(pi, round)?;
        let y = (0..labels)
            .find(|&y| y != yhat && self.vs.restrict_positive(x, y).is_realizable())
            .ok_or(Error::Unrealizable)?;
        Ok(LabelDistribution::point(labels, y))
    }

    fn observe(&mut self, audit: &RoundAudit) -> Result<()> {
        if self.committed.is_none() {
            self.predictions.push(audit.predicted);
        }
        self.vs = self.vs.apply(&audit.record());
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        Some(certify(&self.class, self.witness()?, 0, transcript))
    }
}

/// Full-information adversary forcing `d + 1` mistakes.
///
/// Asks on `x_1, ..., x_{d+1}`. In the first round the true label is `1` or
/// `2`, in later rounds `0` or that first label, always picking the
/// candidate the learner puts less probability on (the first one on ties).
/// A deterministic learner is therefore wrong every round, and a randomized
/// one with probability at least one half.
#[derive(Debug, Clone)]
pub struct HdkFullInfoAdversary {
    d: usize,
    k: usize,
    class: Arc<ConceptClass>,
    first: Option<Label>,
    zeros: BTreeSet<usize>,
    played: usize,
    committed: Option<usize>,
}

impl HdkFullInfoAdversary {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        Self::with_class(hdk_class(d, k)?)
    }

    pub fn with_class(class: Arc<ConceptClass>) -> Result<Self> {
        let (d, k) = dk_of(&class)?;
        Ok(HdkFullInfoAdversary {
            d,
            k,
            class,
            first: None,
            zeros: BTreeSet::new(),
            played: 0,
            committed: None,
        })
    }

    pub fn declared(&self) -> BudgetedVersionSpace {
        BudgetedVersionSpace::uniform(self.class.clone(), 0)
    }

    pub fn scripted_horizon(&self) -> usize {
        self.d + 1
    }

    /// The hypothesis `(y, X')` with `X'` the instances labeled `0` so far.
    pub fn witness(&self) -> Option<usize> {
        self.committed
            .or_else(|| find_hypothesis(&self.class, self.first.unwrap_or(1), &self.zeros))
    }

    fn pick(pi: &LabelDistribution, a: Label, b: Label) -> Label {
        if pi.prob(b) < pi.prob(a) {
            b
        } else {
            a
        }
    }
}

impl Adversary for HdkFullInfoAdversary {
    fn name(&self) -> String {
        "hdk_fullinfo".into()
    }

    fn next_instance(&mut self, round: usize) -> Result<Option<Instance>> {
        if round >= self.scripted_horizon() && self.committed.is_none() {
            self.committed = self.witness();
        }
        Ok(Some(Instance::Point(round % (self.d * self.k))))
    }

    fn choose_target(
        &mut self,
        _round: usize,
        x: &Instance,
        pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        let labels = self.class.label_count();
        if let Some(h) = self.committed {
            return Ok(LabelDistribution::point(labels, self.class.predict(h, x)));
        }
        let y = match self.first {
            None => Self::pick(pi, 1, 2),
            Some(first) => Self::pick(pi, 0, first),
        };
        Ok(LabelDistribution::point(labels, y))
    }

    fn observe(&mut self, audit: &RoundAudit) -> Result<()> {
        if self.committed.is_none() {
            match self.first {
                None => self.first = Some(audit.truth),
                Some(_) if audit.truth == 0 => {
                    if let Instance::Point(i) = audit.instance {
                        self.zeros.insert(i);
                    }
                }
                Some(_) => {}
            }
        }
        self.played += 1;
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        Some(certify(&self.class, self.witness()?, 0, transcript))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_bandit_game, run_full_info_game};
    use crate::learners::FixedLabelLearner;

    #[test]
    fn bandit_variant_forces_dk_mistakes() {
        for label in 0..3 {
            let mut adv = HdkAdversary::new(1, 2).unwrap();
            let vs = adv.declared();
            let mut learner = FixedLabelLearner::new(3, label);
            let run = run_bandit_game(&vs, &mut learner, &mut adv, 2, 0).unwrap();
            assert_eq!(run.mistakes, 2);
            assert!(run.rounds.iter().all(|a| a.predicted != a.truth));
            assert_eq!(run.certificate.unwrap().inconsistencies, 0);
        }
    }

    #[test]
    fn full_info_variant_forces_d_plus_one_mistakes() {
        for label in 0..3 {
            let mut adv = HdkFullInfoAdversary::new(1, 2).unwrap();
            let vs = adv.declared();
            let mut learner = FixedLabelLearner::new(3, label);
            let run = run_full_info_game(&vs, &mut learner, &mut adv, 2, 0).unwrap();
            assert_eq!(run.mistakes, 2);
            assert_eq!(run.certificate.unwrap().inconsistencies, 0);
        }
    }

    #[test]
    fn continuation_stays_realizable() {
        let mut adv = HdkAdversary::new(2, 3).unwrap();
        let vs = adv.declared();
        let mut learner = FixedLabelLearner::new(4, 2);
        let run = run_bandit_game(&vs, &mut learner, &mut adv, 20, 0).unwrap();
        assert!(run.mistakes >= 6);
        assert_eq!(run.certificate.unwrap().inconsistencies, 0);
    }
}
