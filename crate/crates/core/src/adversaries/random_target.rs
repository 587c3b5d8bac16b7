use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classes::{BudgetedVersionSpace, ConceptClass, Instance, Transcript};
use crate::dist::{Label, LabelDistribution};
use crate::engine::{Adversary, ConsistencyCertificate, RoundAudit};
use crate::error::{Error, Result};

use super::certify;

/// Oblivious realizable adversary over `n = k^m` experts.
///
/// Expert `e` predicts the `j`-th base-`k` digit of `e` on instance `x_j`.
/// The sequence shows every `x_j` `k` times in a row, block after block, and
/// labels it with the digit of a target expert drawn uniformly when the
/// adversary is built.
#[derive(Debug, Clone)]
pub struct RandomTargetOblivious {
    k: usize,
    m: usize,
    target: usize,
    class: Arc<ConceptClass>,
}

impl RandomTargetOblivious {
    pub fn new(k: usize, m: usize, seed: u64) -> Result<Self> {
        let n = u32::try_from(m)
            .ok()
            .and_then(|m| k.checked_pow(m))
            .ok_or_else(|| Error::SizeCap(format!("k^m overflows for k = {k}, m = {m}")))?;
        let class = Arc::new(ConceptClass::experts(n, k)?);
        let target = ChaCha8Rng::seed_from_u64(seed).gen_range(0..n);
        Ok(RandomTargetOblivious {
            k,
            m,
            target,
            class,
        })
    }

    pub fn declared(&self) -> BudgetedVersionSpace {
        BudgetedVersionSpace::uniform(self.class.clone(), 0)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Number of rounds in the sequence, `m * k`.
    pub fn len(&self) -> usize {
        self.m * self.k
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the block that round `round` belongs to.
    pub fn block_of(&self, round: usize) -> usize {
        round / self.k
    }

    fn digit(&self, e: usize, j: usize) -> Label {
        (e / self.k.pow(j as u32)) % self.k
    }

    fn instance(&self, j: usize) -> Instance {
        let n = self.class.hypothesis_count();
        Instance::Profile((0..n).map(|e| self.digit(e, j)).collect())
    }
}

impl Adversary for RandomTargetOblivious {
    fn name(&self) -> String {
        "random_target".into()
    }

    fn next_instance(&mut self, round: usize) -> Result<Option<Instance>> {
        if round >= self.len() {
            return Ok(None);
        }
        Ok(Some(self.instance(self.block_of(round))))
    }

    fn choose_target(
        &mut self,
        round: usize,
        _x: &Instance,
        _pi: &LabelDistribution,
    ) -> Result<LabelDistribution> {
        let y = self.digit(self.target, self.block_of(round));
        Ok(LabelDistribution::point(self.k, y))
    }

    fn observe(&mut self, _audit: &RoundAudit) -> Result<()> {
        Ok(())
    }

    fn certificate(&self, transcript: &Transcript) -> Option<ConsistencyCertificate> {
        Some(certify(&self.class, self.target, 0, transcript))
    }
}
