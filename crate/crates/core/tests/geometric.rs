//! Expected mistakes forced by the geometric adversary.
//!
//! With `r = 2` the game is at most `k` rounds long and ends at the first
//! correct guess. The labels are uniform and drawn in advance, so every
//! learner guesses right with probability `1/k` in each round, and the
//! expected number of mistakes is `sum_{j=1..k} ((k-1)/k)^j`.

use std::sync::Arc;

use mistakebound::adversaries::GeometricAdaptive;
use mistakebound::engine::{derive_seed, monte_carlo, Adversary, Learner, Mode, MonteCarloSummary};
use mistakebound::learners::{BanditRandSoa, UniformLearner};
use mistakebound::values::{GameSolver, SolverConfig};

const TRIALS: usize = 10_000;

// Adversaries draw from their own stream so that their labels are
// independent of the engine's sampling of predictions.
fn against_bandit_rand_soa(k: usize, r: u32, seed: u64) -> MonteCarloSummary {
    let declared = GeometricAdaptive::new(k, r, 0).unwrap().declared();
    let solver = Arc::new(GameSolver::new(
        declared.class().clone(),
        SolverConfig::default(),
    ));
    let learner = |_s: u64| -> mistakebound::Result<Box<dyn Learner>> {
        Ok(Box::new(BanditRandSoa::new(
            solver.clone(),
            declared.clone(),
        )?))
    };
    let adversary = |s: u64| -> mistakebound::Result<Box<dyn Adversary>> {
        Ok(Box::new(GeometricAdaptive::new(k, r, derive_seed(s, 1))?))
    };
    monte_carlo(
        Mode::Bandit,
        &declared,
        &learner,
        &adversary,
        100,
        TRIALS,
        seed,
    )
    .unwrap()
}

fn exact_expectation(k: usize) -> f64 {
    let q = (k as f64 - 1.0) / k as f64;
    (1..=k as i32).map(|j| q.powi(j)).sum()
}

#[test]
fn expectation_for_two_rounds_is_three_quarters() {
    assert_eq!(exact_expectation(2), 0.75);
    assert!((exact_expectation(3) - 38.0 / 27.0).abs() < 1e-15);
}

#[test]
fn every_learner_meets_the_exact_expectation() {
    for k in [2usize, 3] {
        let s = against_bandit_rand_soa(k, 2, 11);
        let e = exact_expectation(k);
        assert!(
            (s.mean - e).abs() <= 3.0 * s.stderr,
            "k = {k}: {} vs {e}",
            s.mean
        );

        let declared = GeometricAdaptive::new(k, 2, 0).unwrap().declared();
        let learner = |_s: u64| -> mistakebound::Result<Box<dyn Learner>> {
            Ok(Box::new(UniformLearner::new(k)))
        };
        let adversary = |s: u64| -> mistakebound::Result<Box<dyn Adversary>> {
            Ok(Box::new(GeometricAdaptive::new(k, 2, derive_seed(s, 1))?))
        };
        let u = monte_carlo(
            Mode::Bandit,
            &declared,
            &learner,
            &adversary,
            100,
            TRIALS,
            12,
        )
        .unwrap();
        assert!(
            (u.mean - e).abs() <= 3.0 * u.stderr,
            "k = {k}: {} vs {e}",
            u.mean
        );
    }
}

/// The stated example: for `k = 2, r = 2` any learner makes at least
/// `(k-1)r/2 = 1` expected mistakes. The truncation at `kr/2` rounds caps
/// the expectation at 0.75, so this check fails.
#[test]
fn stated_lower_bound_for_k2_r2() {
    let (k, r) = (2usize, 2u32);
    let s = against_bandit_rand_soa(k, r, 2024);
    let bound = (k as f64 - 1.0) * r as f64 / 2.0;
    assert!(
        s.mean >= bound - 3.0 * s.stderr,
        "mean {} (stderr {}) below (k-1)r/2 = {bound}",
        s.mean,
        s.stderr
    );
}
