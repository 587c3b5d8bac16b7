//! Numerical check of the technical inequality behind the potential bound:
//! `f_k(beta) <= -1` on `[0, 1]`.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::values::{f_k, g_k, g_k_at_beta_k, g_k_at_beta_k_quoted, PotentialConstants};

/// Smallest accepted grid resolution.
pub const MIN_RESOLUTION: usize = 1_000;
/// Allowed excess of the grid maximum over `-1`.
pub const GRID_TOLERANCE: f64 = 1e-12;
/// Allowed excess of the grid maximum over `f_k(beta_k)`.
pub const MAXIMIZER_TOLERANCE: f64 = 1e-9;
/// Allowed error of a closed form for `g_k(beta_k)`.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

/// Findings for one `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub k: usize,
    pub grid_max: f64,
    /// Grid point attaining `grid_max`.
    pub grid_argmax: f64,
    pub beta_k: f64,
    pub f_at_beta_k: f64,
    /// `g_k(beta_k)` evaluated directly.
    pub g_at_beta_k: f64,
    /// `(k^2+1)^k (k-1)^(k-1) / k^(3k)`.
    pub g_closed_form: f64,
    /// `(k^2+1)(k-1)^(k-1) / k^(3k)`.
    pub g_quoted_form: f64,
    pub closed_form_error: f64,
    pub quoted_form_error: f64,
    /// `(k^2+1)(k-1)^((k-1)/k)`
    pub chain_lhs: f64,
    /// `k^(2k+1)`
    pub chain_rhs: f64,
    pub grid_ok: bool,
    pub maximizer_ok: bool,
    pub closed_form_ok: bool,
    pub quoted_form_ok: bool,
    pub chain_ok: bool,
}

impl LemmaRow {
    /// Everything except the quoted closed form holds.
    pub fn passed(&self) -> bool {
        self.grid_ok && self.maximizer_ok && self.closed_form_ok && self.chain_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub resolution: usize,
    pub rows: Vec<LemmaRow>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(LemmaRow::passed)
    }

    /// `LemmaViolation` for the first `k` whose grid exceeds `-1`.
    pub fn check(&self) -> Result<()> {
        for row in &self.rows {
            if !row.grid_ok {
                return Err(Error::LemmaViolation {
                    beta: row.grid_argmax,
                    detail: format!("k = {}: f_k = {} > -1", row.k, row.grid_max),
                });
            }
            if !row.passed() {
                return Err(Error::LemmaViolation {
                    beta: row.beta_k,
                    detail: format!("k = {}: closed form or inequality chain failed", row.k),
                });
            }
        }
        Ok(())
    }
}

/// Evaluates `f_k` on `resolution` evenly spaced points of `[0, 1]` for
/// every `k` in `ks`, together with the maximizer and closed forms.
pub fn check_fk(ks: RangeInclusive<usize>, resolution: usize) -> Result<LemmaReport> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Config(format!(
            "grid resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    if *ks.start() < 2 {
        return Err(Error::Config("k must be at least 2".into()));
    }
    let rows = ks.map(|k| row(k, resolution)).collect();
    Ok(LemmaReport { resolution, rows })
}

fn row(k: usize, resolution: usize) -> LemmaRow {
    let mut grid_max = f64::NEG_INFINITY;
    let mut grid_argmax = 0.0;
    for i in 0..resolution {
        let beta = i as f64 / (resolution - 1) as f64;
        let v = f_k(k, beta);
        if v > grid_max {
            grid_max = v;
            grid_argmax = beta;
        }
    }
    let c = PotentialConstants::new(k);
    let f_at_beta_k = f_k(k, c.beta);
    let g_at_beta_k = g_k(k, c.beta);
    let g_closed_form = g_k_at_beta_k(k);
    let g_quoted_form = g_k_at_beta_k_quoted(k);
    let closed_form_error = (g_at_beta_k - g_closed_form).abs();
    let quoted_form_error = (g_at_beta_k - g_quoted_form).abs();
    let kf = k as f64;
    let chain_lhs = (kf * kf + 1.0) * (kf - 1.0).powf((kf - 1.0) / kf);
    let chain_rhs = kf.powi(2 * k as i32 + 1);
    LemmaRow {
        k,
        grid_max,
        grid_argmax,
        beta_k: c.beta,
        f_at_beta_k,
        g_at_beta_k,
        g_closed_form,
        g_quoted_form,
        closed_form_error,
        quoted_form_error,
        chain_lhs,
        chain_rhs,
        grid_ok: grid_max <= -1.0 + GRID_TOLERANCE,
        maximizer_ok: grid_max <= f_at_beta_k + MAXIMIZER_TOLERANCE,
        closed_form_ok: closed_form_error <= CLOSED_FORM_TOLERANCE,
        quoted_form_ok: quoted_form_error <= CLOSED_FORM_TOLERANCE,
        chain_ok: chain_lhs <= chain_rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_is_rejected() {
        assert!(matches!(check_fk(2..=3, 10), Err(Error::Config(_))));
    }

    #[test]
    fn two_labels() {
        let report = check_fk(2..=2, 1001).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.beta_k, 0.5);
        // log_4(25/64) - 1/2
        let expected = (25.0f64 / 64.0).ln() / 4.0f64.ln() - 0.5;
        assert!((row.f_at_beta_k - expected).abs() < 1e-12);
        assert!(row.grid_ok && row.maximizer_ok && row.closed_form_ok && row.chain_ok);
        assert!(!row.quoted_form_ok);
        assert!(report.check().is_ok());
    }
}
