//! Exact minimax values of the bandit and full-information games.
//!
//! Randomized values are computed by horizon-indexed recursion with a
//! memo on canonical states, and [`stabilize`] raises the horizon until the
//! value stops moving. Deterministic values are integers and are computed
//! exactly by [`DetSolver`].

mod deterministic;
mod exhaustive;
pub mod matrix;
pub mod potential;
mod solver;
mod splits;

use serde::{Deserialize, Serialize};

pub use deterministic::{DetMode, DetSolver};
pub use exhaustive::{exhaustive_value, EXHAUSTIVE_NODE_CAP};
pub use matrix::{
    bandit_round_maximin, solve_matrix_game, BanditOutcome, LossMatrix, MatrixSolution,
    LP_TOLERANCE,
};
pub use potential::{f_k, g_k, g_k_at_beta_k, g_k_at_beta_k_quoted, PotentialConstants};
pub use solver::{default_horizon_cap, GameSolver, RoundGame, SolverConfig};
pub use splits::{canonical_splits, split_children, Split};

use crate::error::{Error, Result};

/// Convergence threshold between successive horizons.
pub const STABILITY_TOLERANCE: f64 = 1e-9;

/// Value of a state at a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameValue {
    pub value: f64,
    pub horizon: u32,
    pub stabilized: bool,
    pub tolerance: f64,
    /// Largest duality gap seen among the matrix games solved so far.
    pub lp_residual: f64,
}

impl GameValue {
    pub fn at(value: f64, horizon: u32) -> Self {
        GameValue {
            value,
            horizon,
            stabilized: false,
            tolerance: STABILITY_TOLERANCE,
            lp_residual: 0.0,
        }
    }
}

/// Raises the horizon from 0 until two successive values differ by less
/// than `tolerance`, and reports the first horizon `T` with
/// `|v(T+1) - v(T)| < tolerance`.
pub fn stabilize<F>(mut value_fn: F, cap: u32, tolerance: f64) -> Result<GameValue>
where
    F: FnMut(u32) -> Result<f64>,
{
    let mut prev = value_fn(0)?;
    let mut last_change = f64::INFINITY;
    for t in 1..=cap.saturating_add(1) {
        let v = value_fn(t)?;
        last_change = (v - prev).abs();
        if last_change < tolerance {
            return Ok(GameValue {
                value: prev,
                horizon: t - 1,
                stabilized: true,
                tolerance,
                lp_residual: 0.0,
            });
        }
        prev = v;
    }
    Err(Error::NoConvergence { cap, last_change })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stabilize_reports_first_flat_horizon() {
        let v = stabilize(|t| Ok([0.0, 0.5, 0.5, 0.5][t.min(3) as usize]), 10, 1e-9).unwrap();
        assert_eq!(v.horizon, 1);
        assert_eq!(v.value, 0.5);
        let v = stabilize(|_| Ok(0.0), 10, 1e-9).unwrap();
        assert_eq!(v.horizon, 0);
    }

    #[test]
    fn stabilize_gives_up() {
        let r = stabilize(|t| Ok(t as f64), 5, 1e-9);
        assert!(matches!(r, Err(Error::NoConvergence { cap: 5, .. })));
    }
}
