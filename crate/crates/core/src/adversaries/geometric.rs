use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classes::{BudgetedVersionSpace, ConceptClass, Instance, Op, Transcript};
use crate::dist::{Label, LabelDistribution};
use crate::engine::{Adversary, ConsistencyCertificate, RoundAudit};
use crate::error::{Error, Result};

use super::{argmin, certify, identity_profile};

/// Adaptive adversary with uniformly random labels and an early stop.
///
/// Uses `k` experts where expert `i` predicts `i`. Before the game it draws
/// `kr/2` labels uniformly and plays them in order. The game ends as soon
/// as the learner has been right `r/2` times or all `kr/2` labels are used.
/// Some label is then predicted at most `r/2` times, and its expert has at
/// most `r` inconsistencies.
#[derive(Debug, Clone)]
pub struct GeometricAdaptive {
    k: usize,
    r: u32,
    labels: Vec<Label>,
    correct: u32,
    played: usize,
    predicted: Vec<u32>,
    class: Arc<ConceptClass>,
    instance: Instance,
}

impl GeometricAdaptive {
    /// Fails with `OddBudget` for odd `r`.
    pub fn new(k: usize, r: u32, seed: u64) -> Result<Self> {
        let class = Arc::new(ConceptClass::experts(k, k)?);
        Self::build(class, identity_profile(k), r, seed)
    }

    /// The same strategy on the constant class over one point, where the
    /// constant hypothesis `y` plays the part of expert `y`.
    pub fn on_constant_class(k: usize, r: u32, seed: u64) -> Result<Self> {
        let class = Arc::new(ConceptClass::constant(k, 1)?);
        Self::build(class, Instance::Point(0), r, seed)
    }

    fn build(class: Arc<ConceptClass>, instance: Instance, r: u32, seed: u64) -> Result<Self> {
        if !r.is_multiple_of(2) {
            return Err(Error::OddBudget(r));
        }
        let k = class.label_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = k * r as usize / 2;
        let labels = (0..len).map(|_| rng.gen_range(0..k)).collect();
        Ok(GeometricAdaptive {
            k,
            r,
            labels,
            correct: 0,
            played: 0,
            predicted: vec![0; k],
            class,
            instance,
        })
    }

    pub fn declared(&self) -> BudgetedVersionSpace {
        BudgetedVersionSpace::uniform(self.class.clone(), self.r)
    }

    /// Longest possible game, `kr/2`.
    pub fn max_rounds(&self) -> usize {
        self.labels.len()
    }

    pub fn correct_predictions(&self) -> u32 {
        self.correct
    }

    fn stopped(&self) -> bool {
        self.played >= self.labels.len() || self.correct >= self.r / 2
    }
}

impl Adversary for GeometricAdaptive {
    fn name(&self) -> String {
        "geometric".into()
    }

    fn next_instance(&mut self, _round: usize) -> Result<Option<Instance>> {
        if self.stopped() {
            return Ok(None);
        }
        Ok(Some(self.instance.clone()))
    }

    fn choose_target(
        &mut self,
        _round: usize,
        _x: &Instance,
        _pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        Ok(LabelDistribution::point(self.k, self.labels[self.played]))
    }

    fn observe(&mut self, audit: &RoundAudit) -> Result<()> {
        if audit.op == Op::Correct {
            self.correct += 1;
        }
        self.predicted[audit.predicted] += 1;
        self.played += 1;
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        Some(certify(
            &self.class,
            argmin(&self.predicted),
            self.r,
            transcript,
        ))
    }
}
