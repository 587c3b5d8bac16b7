//! Zero-sum matrix games.
//!
//! The learner picks a row and pays the entry; the adversary picks a column.
//! [`solve_matrix_game`] solves the game as a linear program with a dense
//! tableau simplex and Bland's pivoting rule. [`bandit_round_maximin`] is a
//! second, LP-free solver for the special shape of bandit round games.

use serde::{Deserialize, Serialize};

use crate::dist::Label;
use crate::error::{Error, Result};

/// Tolerance on the duality gap of a solved matrix game.
pub const LP_TOLERANCE: f64 = 1e-9;

/// Loss matrix: rows are learner predictions, columns are true labels.
///
/// Columns may be a subset of the label set; `col_labels[c]` names column `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    col_labels: Vec<Label>,
}

impl LossMatrix {
    /// Builds a matrix from rows; all rows must have the same length and all
    /// entries must be finite.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let labels = (0..cols).collect();
        Self::with_columns(rows, labels)
    }

    /// Like [`new`](Self::new) with explicit column labels.
    pub fn with_columns(rows: Vec<Vec<f64>>, col_labels: Vec<Label>) -> Result<Self> {
        let r = rows.len();
        let c = col_labels.len();
        if r == 0 || c == 0 {
            return Err(Error::SolverFailure {
                residual: f64::NAN,
                detail: "empty loss matrix".into(),
            });
        }
        let mut entries = Vec::with_capacity(r * c);
        for row in &rows {
            if row.len() != c {
                return Err(Error::SolverFailure {
                    residual: f64::NAN,
                    detail: "ragged loss matrix".into(),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::SolverFailure {
                        residual: f64::NAN,
                        detail: format!("non-finite entry {v}"),
                    });
                }
            }
            entries.extend_from_slice(row);
        }
        Ok(LossMatrix {
            rows: r,
            cols: c,
            entries,
            col_labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col_labels(&self) -> &[Label] {
        &self.col_labels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max_entry(&self) -> f64 {
        self.entries
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Worst column loss of the row mix `pi`.
    pub fn row_guarantee(&self, pi: &[f64]) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| pi[r] * self.get(r, c)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same game seen from the adversary: rows and columns swapped and
    /// losses negated.
    fn negated_transpose(&self) -> LossMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(-self.get(r, c));
            }
        }
        LossMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
            col_labels: (0..self.rows).collect(),
        }
    }

    /// Best row loss against the column mix `tau`.
    pub fn col_guarantee(&self, tau: &[f64]) -> f64 {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| tau[c] * self.get(r, c)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Optimal strategies and value of a matrix game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSolution {
    /// Learner's guaranteed expected loss under `learner`.
    pub value: f64,
    /// Mix over rows.
    pub learner: Vec<f64>,
    /// Mix over columns (indexed like the matrix columns).
    pub adversary: Vec<f64>,
    /// Duality gap `row_guarantee(learner) - col_guarantee(adversary)`.
    pub residual: f64,
}

/// Solves `min_pi max_tau pi^T L tau`.
///
/// With `A = L - min(L) + 1 > 0` the learner side is the LP
/// `max 1^T u  s.t.  A^T u <= 1, u >= 0` and `pi = u / sum(u)`; the
/// adversary's mix is read off the dual prices of the final tableau.
///
/// Nearly tied entries can leave the tableau badly conditioned. When the
/// first solve does not close the duality gap, the game is solved again
/// with other pivot tolerances and from the adversary's side, and the best
/// mix found for each player is kept.
pub fn solve_matrix_game(l: &LossMatrix) -> Result<MatrixSolution> {
    let (m, n) = (l.rows, l.cols);
    if l.max_entry() - l.min_entry() < 1e-15 {
        // Constant matrix: every mix is optimal.
        return Ok(MatrixSolution {
            value: l.get(0, 0),
            learner: uniform(m),
            adversary: uniform(n),
            residual: 0.0,
        });
    }
    let transposed = l.negated_transpose();
    let mut best: Option<(f64, Vec<f64>, f64, Vec<f64>)> = None;
    let mut last_err = None;
    for &tol in &PIVOT_TOLERANCES {
        for side in [false, true] {
            let attempt = if side {
                simplex(&transposed, tol).map(|(tau, pi)| (pi, tau))
            } else {
                simplex(l, tol)
            };
            let (pi, tau) = match attempt {
                Ok(x) => x,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let upper = l.row_guarantee(&pi);
            let lower = l.col_guarantee(&tau);
            let b = best.get_or_insert_with(|| (upper, pi.clone(), lower, tau.clone()));
            if upper < b.0 {
                b.0 = upper;
                b.1 = pi;
            }
            if lower > b.2 {
                b.2 = lower;
                b.3 = tau;
            }
            if b.0 - b.2 <= LP_TOLERANCE {
                let (upper, learner, lower, adversary) = best.expect("set above");
                return Ok(MatrixSolution {
                    value: upper,
                    learner,
                    adversary,
                    residual: (upper - lower).max(0.0),
                });
            }
        }
    }
    match best {
        Some((upper, _, lower, _)) => Err(Error::SolverFailure {
            residual: upper - lower,
            detail: format!("duality gap between {lower} and {upper}"),
        }),
        None => Err(last_err.expect("at least one attempt")),
    }
}

/// Pivot tolerances tried in turn by [`solve_matrix_game`].
const PIVOT_TOLERANCES: [f64; 3] = [1e-9, 1e-11, 1e-13];

/// One simplex run on the learner's LP. Returns `(pi, tau)`.
fn simplex(l: &LossMatrix, pivot_tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (l.rows, l.cols);
    let shift = 1.0 - l.min_entry();
    // Tableau rows 0..n are the column constraints, row n is the objective.
    // Tableau columns 0..m are u, m..m+n are slacks, the last one is the rhs.
    let width = m + n + 1;
    let mut t = vec![0.0f64; (n + 1) * width];
    for c in 0..n {
        for r in 0..m {
            t[c * width + r] = l.get(r, c) + shift;
        }
        t[c * width + m + c] = 1.0;
        t[c * width + width - 1] = 1.0;
    }
    for r in 0..m {
        t[n * width + r] = -1.0;
    }
    let mut basis: Vec<usize> = (m..m + n).collect();

    let max_iter = 50 * (m + n + 4);
    let mut iter = 0;
    loop {
        iter += 1;
        if iter > max_iter {
            return Err(Error::SolverFailure {
                residual: f64::NAN,
                detail: "simplex iteration limit".into(),
            });
        }
        // Bland: smallest index with negative reduced cost.
        let entering = (0..m + n).find(|&j| t[n * width + j] < -1e-13);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for row in 0..n {
            let a = t[row * width + e];
            if a > pivot_tol {
                let ratio = t[row * width + width - 1] / a;
                match leave {
                    None => leave = Some((row, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-15
                            || ((ratio - lratio).abs() <= 1e-15 && basis[row] < basis[lr])
                        {
                            leave = Some((row, ratio));
                        }
                    }
                }
            }
        }
        let Some((p, _)) = leave else {
            return Err(Error::SolverFailure {
                residual: f64::INFINITY,
                detail: "unbounded program".into(),
            });
        };
        pivot(&mut t, width, n, p, e);
        basis[p] = e;
    }

    let mut u = vec![0.0; m];
    for (row, &b) in basis.iter().enumerate() {
        if b < m {
            u[b] = t[row * width + width - 1].max(0.0);
        }
    }
    let w: Vec<f64> = (0..n).map(|c| t[n * width + m + c].max(0.0)).collect();
    let su: f64 = u.iter().sum();
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 || su <= 0.0 {
        return Err(Error::SolverFailure {
            residual: f64::NAN,
            detail: "degenerate optimum".into(),
        });
    }
    Ok((
        u.iter().map(|x| x / su).collect(),
        w.iter().map(|x| x / sw).collect(),
    ))
}

fn pivot(t: &mut [f64], width: usize, m: usize, p: usize, e: usize) {
    let pv = t[p * width + e];
    for j in 0..width {
        t[p * width + j] /= pv;
    }
    for r in 0..=m {
        if r == p {
            continue;
        }
        let f = t[r * width + e];
        if f != 0.0 {
            for j in 0..width {
                t[r * width + j] -= f * t[p * width + j];
            }
        }
    }
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// One label's outcomes in a bandit round at a fixed instance.
///
/// `correct` is the value after positive feedback on the label (`None` when
/// that feedback is unrealizable, which also means the label cannot be the
/// truth). `incorrect` is `1 +` the value after negative feedback on it
/// (`None` when that is unrealizable).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanditOutcome {
    pub correct: Option<f64>,
    pub incorrect: Option<f64>,
}

/// Solves `max_tau min_yhat tau_yhat * correct + (1 - tau_yhat) * incorrect`
/// by bisection on the value.
///
/// Off-diagonal losses depend only on the row, so the row loss is affine in
/// a single coordinate of `tau` and feasibility of a target value reduces to
/// interval bookkeeping. Returns the value and a maximizing `tau` over all
/// labels (zero on unrealizable ones).
pub fn bandit_round_maximin(outcomes: &[BanditOutcome]) -> Result<(f64, Vec<f64>)> {
    if !outcomes.iter().any(|o| o.correct.is_some()) {
        return Err(Error::Unrealizable);
    }
    let finite = outcomes
        .iter()
        .flat_map(|o| [o.correct, o.incorrect])
        .flatten();
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    hi += 1.0;
    let feasible = |v: f64| -> Option<Vec<(f64, f64)>> {
        let mut bounds = Vec::with_capacity(outcomes.len());
        let (mut sum_lo, mut sum_hi) = (0.0, 0.0);
        for o in outcomes {
            let (a, b) = match (o.correct, o.incorrect) {
                (None, Some(n)) => {
                    if n >= v {
                        (0.0, 0.0)
                    } else {
                        return None;
                    }
                }
                (Some(p), None) => {
                    if p >= v {
                        (1.0, 1.0)
                    } else {
                        return None;
                    }
                }
                (Some(p), Some(n)) => {
                    // g(t) = n + t (p - n) >= v on [0, 1]
                    if p > n {
                        ((((v - n) / (p - n)).max(0.0)), 1.0)
                    } else if p < n {
                        (0.0, ((n - v) / (n - p)).min(1.0))
                    } else if n >= v {
                        (0.0, 1.0)
                    } else {
                        return None;
                    }
                }
                (None, None) => return None,
            };
            if a > b {
                return None;
            }
            sum_lo += a;
            sum_hi += b;
            bounds.push((a, b));
        }
        if sum_lo <= 1.0 && sum_hi >= 1.0 {
            Some(bounds)
        } else {
            None
        }
    };
    let mut best = feasible(lo).ok_or_else(|| Error::SolverFailure {
        residual: f64::NAN,
        detail: "water-filling start infeasible".into(),
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match feasible(mid) {
            Some(b) => {
                lo = mid;
                best = b;
            }
            None => hi = mid,
        }
    }
    // Fill from the lower ends, then top up in label order.
    let mut tau: Vec<f64> = best.iter().map(|b| b.0).collect();
    let mut rest = 1.0 - tau.iter().sum::<f64>();
    for (i, b) in best.iter().enumerate() {
        if rest <= 0.0 {
            break;
        }
        let add = (b.1 - tau[i]).min(rest);
        tau[i] += add;
        rest -= add;
    }
    let total: f64 = tau.iter().sum();
    for t in &mut tau {
        *t /= total;
    }
    Ok((lo, tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies() {
        let l = LossMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = solve_matrix_game(&l).unwrap();
        assert!((s.value - 0.5).abs() < 1e-12);
        assert!((s.learner[0] - 0.5).abs() < 1e-12);
        assert!((s.adversary[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_matrix() {
        let l = LossMatrix::new(vec![vec![3.0, 3.0], vec![3.0, 3.0]]).unwrap();
        assert_eq!(solve_matrix_game(&l).unwrap().value, 3.0);
    }

    #[test]
    fn experts_two_two_first_round() {
        // m = (2), k = 2, split one expert per label; continuations are 0 and
        // a wrong guess costs 1 plus the value of the single survivor (0).
        let l = LossMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((solve_matrix_game(&l).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dominated_rows_and_columns() {
        let l = LossMatrix::new(vec![
            vec![2.0, 3.0, 1.0],
            vec![4.0, 5.0, 6.0],
            vec![1.0, 2.0, 3.0],
        ])
        .unwrap();
        let s = solve_matrix_game(&l).unwrap();
        assert!(s.residual <= LP_TOLERANCE);
        assert!((s.value - 7.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn water_filling_matches_pennies() {
        let o = [
            BanditOutcome {
                correct: Some(0.0),
                incorrect: Some(1.0),
            },
            BanditOutcome {
                correct: Some(0.0),
                incorrect: Some(1.0),
            },
        ];
        let (v, tau) = bandit_round_maximin(&o).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((tau[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn water_filling_respects_unrealizable_columns() {
        let o = [
            BanditOutcome {
                correct: Some(0.0),
                incorrect: None,
            },
            BanditOutcome {
                correct: None,
                incorrect: Some(1.0),
            },
        ];
        let (v, tau) = bandit_round_maximin(&o).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
        assert_eq!(tau, vec![1.0, 0.0]);
    }

    #[test]
    fn near_tied_entries_keep_the_gap_small() {
        let a = 1.9999999999998124;
        let l = LossMatrix::new(vec![
            vec![0.0, a, a],
            vec![1.0, 0.9999999999998124, 1.0],
            vec![a, a, 0.0],
        ])
        .unwrap();
        let s = solve_matrix_game(&l).unwrap();
        assert!(s.residual <= LP_TOLERANCE);
        assert!((s.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_near_tie_is_closed_from_the_other_side() {
        let (a, b, c) = (1.0000000000000937, 2.999999986829323, 2.0000000000000937);
        let l = LossMatrix::new(vec![
            vec![a, b, b],
            vec![c, 1.9999999868293228, c],
            vec![b, b, a],
        ])
        .unwrap();
        let s = solve_matrix_game(&l).unwrap();
        assert!(s.residual <= LP_TOLERANCE);
        assert!((s.value - 2.0).abs() < 1e-7);
    }
}
