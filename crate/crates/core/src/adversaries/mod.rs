//! Lower-bound adversary strategies.
//!
//! Each strategy implements [`Adversary`](crate::engine::Adversary) and can
//! name a hypothesis that witnesses the budget it promised, as a
//! [`ConsistencyCertificate`]. Once a scripted phase is over the strategies
//! commit to that hypothesis and answer truthfully, so any horizon stays
//! realizable.

mod budget_label;
mod even_split;
mod geometric;
mod hdk;
mod oblivious;
mod random_target;
mod value_optimal;

pub use budget_label::BudgetLabelAdversary;
pub use even_split::EvenSplitEliminator;
pub use geometric::GeometricAdaptive;
pub use hdk::{HdkAdversary, HdkFullInfoAdversary};
pub use oblivious::ObliviousSequence;
pub use random_target::RandomTargetOblivious;
pub use value_optimal::ValueOptimalAdversary;

use crate::classes::{inconsistency_counts, BudgetedVersionSpace, ConceptClass, Transcript};
use crate::dist::{Label, LabelDistribution};
use crate::engine::ConsistencyCertificate;
use crate::error::{Error, Result};

/// The label of a point-mass `pi`, or `NonDeterministicLearner`.
pub(crate) fn require_point_mass(pi: &LabelDistribution, round: usize) -> Result<Label> {
    pi.as_point_mass()
        .ok_or(Error::NonDeterministicLearner { round })
}

/// Number of records of `transcript` that contradict hypothesis `h`.
pub fn certify_count(class: &ConceptClass, h: usize, transcript: &Transcript) -> u32 {
    transcript
        .records
        .iter()
        .filter(|r| crate::classes::contradicts(class, h, r))
        .count() as u32
}

/// Certificate for a fixed hypothesis `h`, recounted from `transcript`.
pub(crate) fn certify(
    class: &ConceptClass,
    h: usize,
    budget: u32,
    transcript: &Transcript,
) -> ConsistencyCertificate {
    ConsistencyCertificate {
        hypothesis: h,
        inconsistencies: certify_count(class, h, transcript),
        budget,
    }
}

/// The hypothesis with the most budget to spare on `transcript` (lowest
/// index on ties), as a certificate against the initial budgets of
/// `declared`.
pub fn best_certificate(
    declared: &BudgetedVersionSpace,
    transcript: &Transcript,
) -> ConsistencyCertificate {
    let class = declared.class();
    let counts = inconsistency_counts(class, &transcript.records);
    let mut best = 0;
    let mut best_slack = i64::MIN;
    for (h, &c) in counts.iter().enumerate() {
        let slack = declared.initial_budget(h) as i64 - c as i64;
        if slack > best_slack {
            best = h;
            best_slack = slack;
        }
    }
    ConsistencyCertificate {
        hypothesis: best,
        inconsistencies: counts[best],
        budget: declared.initial_budget(best),
    }
}

/// Position of the smallest entry, lowest index on ties.
pub(crate) fn argmin<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

/// The identity profile `(0, 1, ..., k-1)`: expert `i` predicts label `i`.
pub(crate) fn identity_profile(k: usize) -> crate::classes::Instance {
    crate::classes::Instance::Profile((0..k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_prefers_lowest_index() {
        assert_eq!(argmin(&[3, 1, 1, 2]), 1);
        assert_eq!(argmin(&[0.5, 0.5]), 0);
    }

    #[test]
    fn point_mass_required() {
        assert_eq!(
            require_point_mass(&LabelDistribution::point(3, 2), 0),
            Ok(2)
        );
        assert_eq!(
            require_point_mass(&LabelDistribution::uniform(2), 4),
            Err(Error::NonDeterministicLearner { round: 4 })
        );
    }
}
