use serde::{Deserialize, Serialize};

use crate::classes::{FeedbackRecord, Instance, Op};
use crate::dist::{Label, LabelDistribution};
use crate::engine::Learner;
use crate::error::{Error, Result};

/// Penalty factor of [`WeightedPlurality`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alpha {
    Finite(f64),
    /// Elimination: a penalized expert counts less than any number of
    /// experts with more budget left.
    Infinite,
}

/// Deterministic weighted plurality vote over experts.
///
/// Expert weights start at `alpha^r`. After a mistake, the experts that
/// voted for the predicted label are divided by `alpha`; weights below one
/// are zeroed. Weights are kept as integer exponents, so the arithmetic is
/// exact.
#[derive(Debug, Clone)]
pub struct WeightedPlurality {
    n: usize,
    k: usize,
    r: u32,
    alpha: Alpha,
    /// Remaining exponent per expert, `None` once the weight is zero.
    level: Vec<Option<u32>>,
}

impl WeightedPlurality {
    pub fn new(n: usize, k: usize, r: u32, alpha: Alpha) -> Result<Self> {
        if let Alpha::Finite(a) = alpha {
            if a.is_nan() || a <= 1.0 || !a.is_finite() {
                return Err(Error::Config(format!("alpha must be > 1, got {a}")));
            }
        }
        if k < 2 || n == 0 {
            return Err(Error::Config(format!("bad experts setup n = {n}, k = {k}")));
        }
        Ok(WeightedPlurality {
            n,
            k,
            r,
            alpha,
            level: vec![Some(r); n],
        })
    }

    /// Mistake bound `(alpha/(alpha-1)) k ln(n alpha^r / k) + k - 1`, or
    /// `k ln(n/k) + k - 1` for elimination with `r = 0`.
    pub fn mistake_bound(&self) -> f64 {
        let (n, k, r) = (self.n as f64, self.k as f64, self.r as f64);
        match self.alpha {
            Alpha::Finite(a) => a / (a - 1.0) * k * (n.ln() + r * a.ln() - k.ln()) + k - 1.0,
            Alpha::Infinite if self.r == 0 => k * (n / k).ln() + k - 1.0,
            Alpha::Infinite => f64::INFINITY,
        }
    }

    /// Current weights, `alpha^level` or zero.
    pub fn weights(&self) -> Vec<f64> {
        self.level
            .iter()
            .map(|l| match (l, self.alpha) {
                (None, _) => 0.0,
                (Some(l), Alpha::Finite(a)) => a.powi(*l as i32),
                (Some(_), Alpha::Infinite) => 1.0,
            })
            .collect()
    }

    pub fn alive(&self) -> usize {
        self.level.iter().filter(|l| l.is_some()).count()
    }

    fn vote(&self, profile: &[Label]) -> Label {
        match self.alpha {
            Alpha::Finite(a) => {
                let mut score = vec![0.0f64; self.k];
                for (i, l) in self.level.iter().enumerate() {
                    if let Some(l) = l {
                        score[profile[i]] += a.powi(*l as i32);
                    }
                }
                argmax_lowest(&score)
            }
            Alpha::Infinite => {
                // Compare per-label count vectors from the top budget down.
                let levels = self.r as usize + 1;
                let mut counts = vec![vec![0u32; levels]; self.k];
                for (i, l) in self.level.iter().enumerate() {
                    if let Some(l) = l {
                        counts[profile[i]][levels - 1 - *l as usize] += 1;
                    }
                }
                let mut best = 0;
                for y in 1..self.k {
                    if counts[y] > counts[best] {
                        best = y;
                    }
                }
                best
            }
        }
    }
}

fn argmax_lowest(score: &[f64]) -> Label {
    let mut best = 0;
    for (y, &s) in score.iter().enumerate() {
        if s > score[best] {
            best = y;
        }
    }
    best
}

impl Learner for WeightedPlurality {
    fn name(&self) -> String {
        "weighted_plurality".into()
    }

    fn predict(&mut self, x: &Instance) -> Result<LabelDistribution> {
        let Instance::Profile(p) = x else {
            return Err(Error::InstanceOutOfDomain(x.to_string()));
        };
        if p.len() != self.n {
            return Err(Error::InstanceOutOfDomain(x.to_string()));
        }
        Ok(LabelDistribution::point(self.k, self.vote(p)))
    }

    fn observe(&mut self, feedback: &FeedbackRecord) -> Result<()> {
        if feedback.op != Op::Incorrect {
            return Ok(());
        }
        let Instance::Profile(p) = &feedback.instance else {
            return Err(Error::InstanceOutOfDomain(feedback.instance.to_string()));
        };
        for (i, l) in self.level.iter_mut().enumerate() {
            if p[i] == feedback.predicted {
                *l = match (*l, self.alpha) {
                    (Some(v), Alpha::Finite(_)) if v > 0 => Some(v - 1),
                    (Some(v), Alpha::Infinite) if v > 0 => Some(v - 1),
                    _ => None,
                };
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neg(p: Vec<Label>, yhat: Label) -> FeedbackRecord {
        FeedbackRecord {
            instance: Instance::Profile(p),
            predicted: yhat,
            op: Op::Incorrect,
            revealed: None,
        }
    }

    #[test]
    fn bound_for_two_experts() {
        let wp = WeightedPlurality::new(2, 2, 0, Alpha::Finite(std::f64::consts::E)).unwrap();
        assert!((wp.mistake_bound() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_stay_in_range() {
        let a = 3.0;
        let mut wp = WeightedPlurality::new(3, 3, 2, Alpha::Finite(a)).unwrap();
        for round in 0..6 {
            let p = vec![0, 1, 2];
            let yhat = wp
                .predict(&Instance::Profile(p.clone()))
                .unwrap()
                .as_point_mass()
                .unwrap();
            wp.observe(&neg(p, yhat)).unwrap();
            for w in wp.weights() {
                assert!(w == 0.0 || (1.0..=a * a).contains(&w), "round {round}: {w}");
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_label() {
        let mut wp = WeightedPlurality::new(2, 2, 0, Alpha::Infinite).unwrap();
        let d = wp.predict(&Instance::Profile(vec![1, 0])).unwrap();
        assert_eq!(d.as_point_mass(), Some(0));
    }

    #[test]
    fn elimination_prefers_budget() {
        let mut wp = WeightedPlurality::new(3, 2, 1, Alpha::Infinite).unwrap();
        wp.observe(&neg(vec![0, 0, 1], 0)).unwrap();
        // Experts 0 and 1 dropped to level 0; expert 2 still has budget 1.
        let d = wp.predict(&Instance::Profile(vec![0, 0, 1])).unwrap();
        assert_eq!(d.as_point_mass(), Some(1));
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(WeightedPlurality::new(2, 2, 0, Alpha::Finite(1.0)).is_err());
    }
}
