//! Suites computed from exact values, without simulation.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use super::{Check, ExpertsGrid, Relation};
use crate::classes::{
    expert_version_space, BudgetedVersionSpace, ConceptClass, ExpertGameState, StateKey,
};
use crate::error::Result;
use crate::lemma::{check_fk, CLOSED_FORM_TOLERANCE, GRID_TOLERANCE, MAXIMIZER_TOLERANCE};
use crate::scenario::ClassSpec;
use crate::values::{exhaustive_value, DetSolver, GameSolver, PotentialConstants, SolverConfig};

/// Every state reachable from `root` under bandit feedback.
pub(crate) fn reachable_states(
    root: &BudgetedVersionSpace,
    solver: &GameSolver,
) -> Result<Vec<BudgetedVersionSpace>> {
    let k = root.class().label_count();
    let mut seen: HashMap<StateKey, ()> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(root.state_key(), ());
    queue.push_back(root.clone());
    while let Some(vs) = queue.pop_front() {
        for x in solver.instances(&vs)? {
            for y in 0..k {
                for child in [vs.restrict_positive(&x, y), vs.restrict_negative(&x, y)] {
                    if child.is_realizable() && seen.insert(child.state_key(), ()).is_none() {
                        queue.push_back(child);
                    }
                }
            }
        }
        order.push(vs);
    }
    Ok(order)
}

/// Largest `|primal - dual|` over the states reachable from `root` and the
/// horizons up to its stabilization horizon, with the number of states.
fn worst_gap(class: Arc<ConceptClass>, r: u32) -> Result<(f64, usize, u32)> {
    let solver = GameSolver::new(class.clone(), SolverConfig::default());
    let root = BudgetedVersionSpace::uniform(class, r);
    let states = reachable_states(&root, &solver)?;
    let horizon = solver.stabilized_value(&root)?.horizon;
    let mut worst = 0.0f64;
    for vs in &states {
        for t in 0..=horizon {
            let p = solver.primal_value(vs, t)?.value;
            let d = solver.dual_value(vs, t)?.value;
            worst = worst.max((p - d).abs());
        }
    }
    Ok((worst, states.len(), horizon))
}

pub(super) fn dual(
    ks: &[usize],
    n_max: usize,
    r_max: u32,
    classes: &[ClassSpec],
    tolerance: f64,
    time_limit_s: f64,
) -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut push = |id: String, class: Arc<ConceptClass>, r: u32| -> Result<()> {
        let (gap, states, horizon) = worst_gap(class, r)?;
        out.push(
            Check::new(id, gap, Relation::AtMost, 0.0, tolerance)
                .with_detail(format!("{states} states, horizons 0..={horizon}")),
        );
        Ok(())
    };
    for &k in ks {
        for n in k..=n_max {
            for r in 0..=r_max {
                push(
                    format!("dual/experts-n{n}-k{k}-r{r}"),
                    Arc::new(ConceptClass::experts(n, k)?),
                    r,
                )?;
            }
        }
    }
    for spec in classes {
        let class = spec.build()?;
        for r in 0..=r_max {
            push(format!("dual/{}-r{r}", class_tag(spec)), class.clone(), r)?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    out.push(Check::new(
        "dual/runtime-seconds",
        secs,
        Relation::AtMost,
        time_limit_s,
        0.0,
    ));
    Ok(out)
}

fn class_tag(spec: &ClassSpec) -> String {
    match spec {
        ClassSpec::Experts { n, k, .. } => format!("experts-n{n}-k{k}"),
        ClassSpec::Constant { k, domain, .. } => format!("constant-k{k}-x{domain}"),
        ClassSpec::Hdk { d, k, .. } => format!("hdk-d{d}-k{k}"),
        ClassSpec::Table { labels, rows, .. } => format!("table-{}x{labels}", rows.len()),
    }
}

/// Count vectors `m` with `1 <= sum(m) <= max_total`, `max_budget + 1`
/// levels and a non-empty top level, so no state is listed twice.
fn count_vectors(max_total: u32, max_budget: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for levels in 1..=max_budget as usize + 1 {
        let mut m = vec![0u32; levels];
        loop {
            let total: u32 = m.iter().sum();
            if total >= 1 && total <= max_total && m[levels - 1] > 0 {
                out.push(m.clone());
            }
            let mut i = 0;
            loop {
                if i == levels {
                    break;
                }
                m[i] += 1;
                if m[i] <= max_total {
                    break;
                }
                m[i] = 0;
                i += 1;
            }
            if i == levels {
                break;
            }
        }
    }
    out
}

pub(super) fn oracle(
    ks: &[usize],
    max_total: u32,
    max_budget: u32,
    max_horizon: u32,
    tolerance: f64,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &k in ks {
        let mut worst_primal = 0.0f64;
        let mut worst_experts = 0.0f64;
        let mut cases = 0;
        let vectors = count_vectors(max_total, max_budget);
        let experts_solver = GameSolver::new(
            Arc::new(ConceptClass::experts_unchecked(k, k)),
            SolverConfig::default(),
        );
        for m in &vectors {
            let state = ExpertGameState::new(m.clone(), k)?;
            let vs = expert_version_space(&state)?;
            let solver = GameSolver::new(vs.class().clone(), SolverConfig::default());
            for t in 0..=max_horizon {
                let brute = exhaustive_value(&vs, t)?.value;
                let primal = solver.primal_value(&vs, t)?.value;
                let counts = experts_solver.expert_state_value(&state, t)?.value;
                worst_primal = worst_primal.max((primal - brute).abs());
                worst_experts = worst_experts.max((counts - brute).abs());
                cases += 1;
            }
        }
        let detail = format!("{} states, {cases} (state, horizon) pairs", vectors.len());
        out.push(
            Check::new(
                format!("oracle/k{k}/primal"),
                worst_primal,
                Relation::AtMost,
                0.0,
                tolerance,
            )
            .with_detail(detail.clone()),
        );
        out.push(
            Check::new(
                format!("oracle/k{k}/expert-counts"),
                worst_experts,
                Relation::AtMost,
                0.0,
                tolerance,
            )
            .with_detail(detail),
        );
    }
    Ok(out)
}

/// Closed-form sandwich around the stabilized value of `n` experts with
/// `k` labels and budget `r`: `(lower, upper)`.
pub fn experts_sandwich_bounds(n: usize, k: usize, r: u32) -> (f64, f64) {
    let kf = k as f64;
    let log = (n as f64).ln() / kf.ln();
    let floor_log = crate::scenario::floor_log(n, k) as f64;
    let lower = ((kf - 1.0) / 2.0 * floor_log).max((kf - 1.0) * r as f64 / 2.0);
    let upper = kf * log + 2.0 * kf * r as f64;
    (lower, upper)
}

/// One solver per label count, shared by every cell of the grid so that its
/// memo covers all states met on the way.
fn grid_solvers(grid: &ExpertsGrid) -> HashMap<usize, GameSolver> {
    let n_max = grid.n.iter().copied().max().unwrap_or(1);
    grid.k
        .iter()
        .map(|&k| {
            let class = Arc::new(ConceptClass::experts_unchecked(n_max.max(k), k));
            (k, GameSolver::new(class, SolverConfig::default()))
        })
        .collect()
}

pub(super) fn experts_sandwich(grid: &ExpertsGrid, tolerance: f64) -> Result<Vec<Check>> {
    let solvers = grid_solvers(grid);
    let mut out = Vec::new();
    for (n, k, r) in grid.cells() {
        let v = solvers[&k].stabilized_expert_value(&ExpertGameState::fresh(n as u32, k, r))?;
        let (lo, hi) = experts_sandwich_bounds(n, k, r);
        let id = format!("experts-rand/n{n}-k{k}-r{r}");
        let detail = format!("stabilized at horizon {}", v.horizon);
        out.push(
            Check::new(
                format!("{id}/lower"),
                v.value,
                Relation::AtLeast,
                lo,
                tolerance,
            )
            .with_detail(detail.clone()),
        );
        out.push(
            Check::new(
                format!("{id}/upper"),
                v.value,
                Relation::AtMost,
                hi,
                tolerance,
            )
            .with_detail(detail),
        );
    }
    Ok(out)
}

pub(super) fn potential(grid: &ExpertsGrid, tolerance: f64) -> Result<Vec<Check>> {
    let solvers = grid_solvers(grid);
    let mut out = Vec::new();
    let mut ks: Vec<usize> = grid.k.clone();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let solver = &solvers[&k];
        for (n, kk, r) in grid.cells() {
            if kk == k {
                solver.stabilized_expert_value(&ExpertGameState::fresh(n as u32, k, r))?;
            }
        }
        let constants = PotentialConstants::new(k);
        let mut worst = f64::NEG_INFINITY;
        let mut witness = String::new();
        let states = solver.memoized_expert_states();
        for m in &states {
            let state = ExpertGameState::new(m.clone(), k)?;
            let v = solver.stabilized_expert_value(&state)?.value;
            let excess = v - constants.value_bound(&state);
            if excess > worst {
                worst = excess;
                witness = state.to_string();
            }
        }
        out.push(
            Check::new(
                format!("potential/k{k}"),
                worst,
                Relation::AtMost,
                0.0,
                tolerance,
            )
            .with_detail(format!(
                "{} memoized states; largest V - bound at {witness}",
                states.len()
            )),
        );
    }
    Ok(out)
}

pub(super) fn lemma(k_min: usize, k_max: usize, resolution: usize) -> Result<Vec<Check>> {
    let report = check_fk(k_min..=k_max, resolution)?;
    let mut out = Vec::new();
    for row in &report.rows {
        let k = row.k;
        out.push(
            Check::new(
                format!("lemma/k{k}/grid"),
                row.grid_max,
                Relation::AtMost,
                -1.0,
                GRID_TOLERANCE,
            )
            .with_detail(format!("maximum at beta = {}", row.grid_argmax)),
        );
        out.push(Check::new(
            format!("lemma/k{k}/maximizer"),
            row.grid_max,
            Relation::AtMost,
            row.f_at_beta_k,
            MAXIMIZER_TOLERANCE,
        ));
        out.push(Check::new(
            format!("lemma/k{k}/closed-form"),
            row.g_at_beta_k,
            Relation::Equal,
            row.g_closed_form,
            CLOSED_FORM_TOLERANCE,
        ));
        out.push(Check::new(
            format!("lemma/k{k}/chain"),
            row.chain_lhs,
            Relation::AtMost,
            row.chain_rhs,
            0.0,
        ));
    }
    Ok(out)
}

pub(super) fn hdk(pairs: &[(usize, usize)]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &(d, k) in pairs {
        let class = Arc::new(ConceptClass::hdk(d, k, crate::classes::DEFAULT_CLASS_CAP)?);
        let solver = DetSolver::new(class.clone(), SolverConfig::default().state_cap);
        let vs = BudgetedVersionSpace::uniform(class, 0);
        let full = solver.opt_full_det(&vs)?.value;
        let bandit = solver.opt_bandit_det(&vs)?.value;
        out.push(Check::new(
            format!("hdk/d{d}-k{k}/full-det"),
            full,
            Relation::Equal,
            (d + 1) as f64,
            0.0,
        ));
        out.push(Check::new(
            format!("hdk/d{d}-k{k}/bandit-det"),
            bandit,
            Relation::AtLeast,
            (d * k) as f64,
            0.0,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_vectors_are_distinct_and_bounded() {
        let v = count_vectors(3, 1);
        // one level: (1), (2), (3); two levels with m[1] >= 1 and total <= 3
        assert_eq!(v.len(), 3 + 6);
        assert!(v
            .iter()
            .all(|m| m.iter().sum::<u32>() <= 3 && *m.last().unwrap() > 0));
    }

    #[test]
    fn sandwich_for_two_experts() {
        let (lo, hi) = experts_sandwich_bounds(2, 2, 0);
        assert_eq!(lo, 0.5);
        assert!((hi - 2.0).abs() < 1e-12);
    }
}
