//! Constants and helper functions of the `k^(2i)` potential argument.

use serde::{Deserialize, Serialize};

use crate::classes::ExpertGameState;

/// `b(k)` and `beta_k` for a label count `k >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialConstants {
    pub k: usize,
    /// `k^k / (k-1)^(k-1)`
    pub b: f64,
    /// `(k^2 - k + 1) / (k^3 - k)`, the maximizer of `g_k`.
    pub beta: f64,
}

impl PotentialConstants {
    pub fn new(k: usize) -> Self {
        let kf = k as f64;
        // Logs keep the ratio accurate for larger k.
        let b = (kf * kf.ln() - (kf - 1.0) * (kf - 1.0).ln()).exp();
        let beta = (kf * kf - kf + 1.0) / (kf * kf * kf - kf);
        PotentialConstants { k, b, beta }
    }

    /// `k * log_{b(k)} W(m)`, the upper bound on the value of state `m`.
    /// Returns `-inf` for the empty state.
    pub fn value_bound(&self, state: &ExpertGameState) -> f64 {
        match state.potential() {
            Some(0) => f64::NEG_INFINITY,
            Some(w) => self.k as f64 * (w as f64).ln() / self.b.ln(),
            None => f64::INFINITY,
        }
    }
}

/// `g_k(beta) = ((1-beta)/k^2 + beta) * (beta/k^2 + 1 - beta)^(k-1)`.
pub fn g_k(k: usize, beta: f64) -> f64 {
    let k2 = (k * k) as f64;
    ((1.0 - beta) / k2 + beta) * (beta / k2 + 1.0 - beta).powi(k as i32 - 1)
}

/// `f_k(beta) = log_{b(k)} g_k(beta) - 1/k`.
pub fn f_k(k: usize, beta: f64) -> f64 {
    let c = PotentialConstants::new(k);
    g_k(k, beta).ln() / c.b.ln() - 1.0 / k as f64
}

/// Closed form of `g_k(beta_k)` as obtained by direct substitution:
/// `(k^2 + 1)^k (k-1)^(k-1) / k^(3k)`.
pub fn g_k_at_beta_k(k: usize) -> f64 {
    let kf = k as f64;
    (kf * (kf * kf + 1.0).ln() + (kf - 1.0) * (kf - 1.0).ln() - 3.0 * kf * kf.ln()).exp()
}

/// The closed form `(k^2 + 1)(k-1)^(k-1) / k^(3k)` as it is usually quoted.
/// It differs from [`g_k_at_beta_k`] by a factor `(k^2+1)^(k-1)`.
pub fn g_k_at_beta_k_quoted(k: usize) -> f64 {
    let kf = k as f64;
    ((kf * kf + 1.0).ln() + (kf - 1.0) * (kf - 1.0).ln() - 3.0 * kf * kf.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_for_two_labels() {
        let c = PotentialConstants::new(2);
        assert!((c.b - 4.0).abs() < 1e-12);
        assert!((c.beta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn b_is_at_least_k() {
        for k in 2..20 {
            assert!(PotentialConstants::new(k).b >= k as f64);
        }
    }

    #[test]
    fn g_two_at_half() {
        // (1/8 + 1/2)(1/8 + 1/2) = 25/64
        assert!((g_k(2, 0.5) - 25.0 / 64.0).abs() < 1e-15);
        assert!((g_k_at_beta_k(2) - 25.0 / 64.0).abs() < 1e-15);
        assert!((g_k_at_beta_k_quoted(2) - 5.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn substituted_closed_form_matches_for_many_k() {
        for k in 2..=10 {
            let c = PotentialConstants::new(k);
            let direct = g_k(k, c.beta);
            assert!((direct - g_k_at_beta_k(k)).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn value_bound_of_single_budget_one_expert() {
        let c = PotentialConstants::new(2);
        let s = ExpertGameState::new(vec![0, 1], 2).unwrap();
        assert!((c.value_bound(&s) - 2.0).abs() < 1e-12);
    }
}
