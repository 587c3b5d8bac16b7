//! Probability vectors over a finite label set.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A label is an index into the label set `0..k`.
///
/// For the H(d,k) classes the label set is `0..=k`, where `0` is the special
/// label and `1..=k` are the positive labels.
pub type Label = usize;

/// Tolerance used when accepting a probability vector as normalized.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A distribution over labels, stored densely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelDistribution {
    probs: Vec<f64>,
}

impl LabelDistribution {
    /// Validates `probs` and wraps it. Entries must be finite and
    /// non-negative and sum to one within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let d = LabelDistribution { probs };
        d.validate()?;
        Ok(d)
    }

    /// Cleans up solver output: clamps tiny negatives to zero and rescales.
    ///
    /// Fails if the input is badly off (any entry below `-1e-7` or a sum
    /// away from one by more than `1e-7`).
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DistributionInvalid("empty label set".into()));
        }
        let mut probs = Vec::with_capacity(weights.len());
        for &w in weights {
            if !w.is_finite() || w < -1e-7 {
                return Err(Error::DistributionInvalid(format!("bad weight {w}")));
            }
            probs.push(w.max(0.0));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-7 {
            return Err(Error::DistributionInvalid(format!(
                "weights sum to {total}"
            )));
        }
        for p in &mut probs {
            *p /= total;
        }
        Ok(LabelDistribution { probs })
    }

    /// Point mass on `label` in a label set of size `count`.
    pub fn point(count: usize, label: Label) -> Self {
        let mut probs = vec![0.0; count];
        probs[label] = 1.0;
        LabelDistribution { probs }
    }

    /// Uniform distribution on `0..count`.
    pub fn uniform(count: usize) -> Self {
        LabelDistribution {
            probs: vec![1.0 / count as f64; count],
        }
    }

    pub fn label_count(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, label: Label) -> f64 {
        self.probs.get(label).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Labels with positive probability.
    pub fn support(&self) -> impl Iterator<Item = Label> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    /// Returns the label if all mass sits on one label.
    pub fn as_point_mass(&self) -> Option<Label> {
        let mut support = self.support();
        let first = support.next()?;
        if support.next().is_none() {
            Some(first)
        } else {
            None
        }
    }

    /// Checks the invariants of a distribution.
    pub fn validate(&self) -> Result<()> {
        if self.probs.is_empty() {
            return Err(Error::DistributionInvalid("empty label set".into()));
        }
        let mut total = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::DistributionInvalid(format!("entry {i} is {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::DistributionInvalid(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(())
    }

    /// Draws one label by inverse transform on a single uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Label {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }

    /// Expected value of `f(label)` under this distribution.
    pub fn expect(&self, mut f: impl FnMut(Label) -> f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| p * f(i))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_is_detected() {
        let d = LabelDistribution::point(3, 2);
        assert_eq!(d.as_point_mass(), Some(2));
        assert_eq!(LabelDistribution::uniform(2).as_point_mass(), None);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(LabelDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(LabelDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(LabelDistribution::new(vec![]).is_err());
        assert!(LabelDistribution::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn from_weights_cleans_rounding() {
        let d = LabelDistribution::from_weights(&[0.5 + 1e-10, 0.5, -1e-12]).unwrap();
        assert!(d.validate().is_ok());
        assert_eq!(d.prob(2), 0.0);
    }

    #[test]
    fn sampling_never_hits_zero_mass() {
        let d = LabelDistribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut rng), 1);
        }
    }
}
