use crate::classes::{FeedbackRecord, Instance, Op};
use crate::dist::{Label, LabelDistribution};
use crate::engine::Learner;
use crate::error::{Error, Result};

use super::FullInfoLearner;

/// Builds the experts learner over `k^r` experts with `k` labels and budget `r`.
pub type ExpertsLearnerFactory =
    dyn Fn(usize, usize, u32) -> Result<Box<dyn Learner>> + Send + Sync;

struct Leaf {
    address: Vec<Label>,
    sigma: Vec<(usize, Instance, Label)>,
    inner: Box<dyn FullInfoLearner>,
    bad: bool,
}

/// Read-only view of a leaf of the guess tree.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafView {
    pub address: Vec<Label>,
    /// Guessed examples `(round, instance, label)` the leaf's learner was fed.
    pub sigma: Vec<(usize, Instance, Label)>,
    pub bad: bool,
}

/// Bandit learner built from a deterministic full-information learner with
/// mistake bound `r`.
///
/// It keeps a `k`-ary tree of depth at most `r`. Each leaf runs a copy of
/// the inner learner trained on the guessed examples along its path. Expert
/// `e` in `[k]^r` follows the leaf whose address is a prefix of `e`'s
/// digits, and an experts learner with budget `r` plays on these `k^r`
/// experts. When a good leaf's prediction contradicts the feedback, it gets
/// `k` children, one per guess of the true label, or is marked bad at depth
/// `r`.
pub struct ReductionLearner {
    k: usize,
    r: u32,
    leaves: Vec<Leaf>,
    experts: Box<dyn Learner>,
    round: usize,
    pending: Option<(Instance, Vec<Label>)>,
}

impl ReductionLearner {
    pub fn new(
        inner: Box<dyn FullInfoLearner>,
        k: usize,
        r: u32,
        experts_factory: &ExpertsLearnerFactory,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("need k >= 2, got {k}")));
        }
        let n = k
            .checked_pow(r)
            .ok_or_else(|| Error::Config(format!("k^r overflows for k = {k}, r = {r}")))?;
        let experts = experts_factory(n, k, r)?;
        Ok(ReductionLearner {
            k,
            r,
            leaves: vec![Leaf {
                address: Vec::new(),
                sigma: Vec::new(),
                inner,
                bad: false,
            }],
            experts,
            round: 0,
            pending: None,
        })
    }

    pub fn expert_count(&self) -> usize {
        self.k.pow(self.r)
    }

    pub fn leaves(&self) -> Vec<LeafView> {
        self.leaves
            .iter()
            .map(|l| LeafView {
                address: l.address.clone(),
                sigma: l.sigma.clone(),
                bad: l.bad,
            })
            .collect()
    }

    /// Experts covered by a leaf: a contiguous range of indices.
    fn range(&self, address: &[Label]) -> std::ops::Range<usize> {
        let mut base = 0usize;
        for &a in address {
            base = base * self.k + a;
        }
        let width = self.k.pow(self.r - address.len() as u32);
        base * width..(base + 1) * width
    }
}

impl Learner for ReductionLearner {
    fn name(&self) -> String {
        "reduction".into()
    }

    fn predict(&mut self, x: &Instance) -> Result<LabelDistribution> {
        let mut preds = Vec::with_capacity(self.leaves.len());
        for leaf in &mut self.leaves {
            preds.push(leaf.inner.predict_label(x)?);
        }
        let mut profile = vec![0; self.expert_count()];
        for (leaf, &p) in self.leaves.iter().zip(&preds) {
            for e in self.range(&leaf.address) {
                profile[e] = p;
            }
        }
        let pi = self.experts.predict(&Instance::Profile(profile))?;
        self.pending = Some((x.clone(), preds));
        Ok(pi)
    }

    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()> {
        let (x, preds) = self
            .pending
            .take()
            .ok_or_else(|| Error::Config("observe without predict".into()))?;
        let mut profile = vec![0; self.expert_count()];
        for (leaf, &p) in self.leaves.iter().zip(&preds) {
            for e in self.range(&leaf.address) {
                profile[e] = p;
            }
        }
        self.experts.observe(&FeedbackRecord {
            instance: Instance::Profile(profile),
            predicted: feedback.predicted,
            op: feedback.op,
            revealed: feedback.revealed,
        })?;

        let t = self.round;
        self.round += 1;
        let old = std::mem::take(&mut self.leaves);
        for (leaf, p) in old.into_iter().zip(preds) {
            let contradicted = !leaf.bad
                && match (feedback.revealed, feedback.op) {
                    (Some(y), _) => p != y,
                    (None, Op::Correct) => p != feedback.predicted,
                    (None, Op::Incorrect) => p == feedback.predicted,
                };
            if !contradicted {
                self.leaves.push(leaf);
            } else if leaf.address.len() as u32 >= self.r {
                self.leaves.push(Leaf { bad: true, ..leaf });
            } else {
                for y in 0..self.k {
                    let mut inner = leaf.inner.boxed_clone();
                    inner.update(&x, y)?;
                    let mut address = leaf.address.clone();
                    address.push(y);
                    let mut sigma = leaf.sigma.clone();
                    sigma.push((t, x.clone(), y));
                    self.leaves.push(Leaf {
                        address,
                        sigma,
                        inner,
                        bad: false,
                    });
                }
            }
        }
        Ok(())
    }
}
