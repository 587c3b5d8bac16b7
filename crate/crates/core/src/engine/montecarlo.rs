//! Seeded, parallel Monte-Carlo estimation of expected mistakes.
//!
//! Trial `i` of a run with master seed `s` plays with seed
//! `trial_seed(s, i) = splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15)`
//! (wrapping arithmetic on `u64`). Strategies that need their own
//! randomness derive it with [`derive_seed`] so that the game's label draws
//! and the strategy's draws never share a stream.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_game, Adversary, Learner, Mode, RunResult};
use crate::classes::BudgetedVersionSpace;
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed.wrapping_add((trial as u64).wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Independent stream `stream` derived from `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(GOLDEN_GAMMA)))
}

/// Sample statistics of the mistake counts of many trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub mean: f64,
    /// Standard error of the mean (sample standard deviation over `sqrt(trials)`).
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub min: usize,
    pub max: usize,
}

impl MonteCarloSummary {
    /// Summarizes counts given in trial order.
    pub fn from_counts(counts: &[usize]) -> Self {
        let n = counts.len();
        let mean = neumaier(counts.iter().map(|&c| c as f64)) / n as f64;
        let var = if n > 1 {
            neumaier(counts.iter().map(|&c| (c as f64 - mean).powi(2))) / (n - 1) as f64
        } else {
            0.0
        };
        let stderr = (var / n as f64).sqrt();
        MonteCarloSummary {
            trials: n,
            mean,
            stderr,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
            min: counts.iter().copied().min().unwrap_or(0),
            max: counts.iter().copied().max().unwrap_or(0),
        }
    }
}

/// Compensated summation.
fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Builds a fresh strategy for the trial seed it is given.
pub type LearnerFactory<'a> = dyn Fn(u64) -> Result<Box<dyn Learner>> + Sync + 'a;
/// Builds a fresh adversary for the trial seed it is given.
pub type AdversaryFactory<'a> = dyn Fn(u64) -> Result<Box<dyn Adversary>> + Sync + 'a;

/// Runs `trials` independent games in parallel and maps each result
/// through `inspect`. Outputs are returned in trial order; errors carry the
/// trial index.
#[allow(clippy::too_many_arguments)]
pub fn run_trials<T, F>(
    mode: Mode,
    declared: &BudgetedVersionSpace,
    learner_factory: &LearnerFactory<'_>,
    adversary_factory: &AdversaryFactory<'_>,
    horizon: usize,
    trials: usize,
    seed: u64,
    inspect: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, RunResult) -> Result<T> + Sync,
{
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let wrap = |e: Error| Error::Trial {
                trial: i,
                source: Box::new(e),
            };
            let mut learner = learner_factory(s).map_err(wrap)?;
            let mut adversary = adversary_factory(s).map_err(wrap)?;
            let run = run_game(
                mode,
                declared,
                learner.as_mut(),
                adversary.as_mut(),
                horizon,
                s,
            )
            .map_err(wrap)?;
            inspect(i, run).map_err(wrap)
        })
        .collect()
}

/// Mean and standard error of the mistake count over `trials` games.
pub fn monte_carlo(
    mode: Mode,
    declared: &BudgetedVersionSpace,
    learner_factory: &LearnerFactory<'_>,
    adversary_factory: &AdversaryFactory<'_>,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    let counts = run_trials(
        mode,
        declared,
        learner_factory,
        adversary_factory,
        horizon,
        trials,
        seed,
        |_, r| Ok(r.mistakes),
    )?;
    Ok(MonteCarloSummary::from_counts(&counts))
}
