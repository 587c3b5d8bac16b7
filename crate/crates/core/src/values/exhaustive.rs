//! Brute-force game-tree evaluation, used as a reference for the memoized
//! recursions.
//!
//! Nothing is shared between tree nodes. Within one node, children that
//! coincide exactly (same residual budgets) are evaluated once, which for
//! experts means one evaluation per subset of predictors instead of one per
//! profile. Round games are solved with the water-filling maximin, not with
//! the simplex used elsewhere.

use std::cell::Cell;
use std::collections::HashMap;

use super::matrix::{bandit_round_maximin, BanditOutcome};
use super::GameValue;
use crate::classes::{BudgetedVersionSpace, Instance};
use crate::error::{Error, Result};

/// Largest number of tree nodes [`exhaustive_value`] will visit.
pub const EXHAUSTIVE_NODE_CAP: u64 = 20_000_000;

/// Exact value of the bandit game from `vs` over `horizon` rounds by full
/// game-tree evaluation. Errors with `SizeCap` beyond
/// [`EXHAUSTIVE_NODE_CAP`] nodes.
pub fn exhaustive_value(vs: &BudgetedVersionSpace, horizon: u32) -> Result<GameValue> {
    if !vs.is_realizable() {
        return Err(Error::Unrealizable);
    }
    let nodes = Cell::new(0u64);
    let v = node(vs, horizon, &nodes)?;
    Ok(GameValue::at(v, horizon))
}

fn node(vs: &BudgetedVersionSpace, t: u32, nodes: &Cell<u64>) -> Result<f64> {
    if t == 0 {
        return Ok(0.0);
    }
    nodes.set(nodes.get() + 1);
    if nodes.get() > EXHAUSTIVE_NODE_CAP {
        return Err(Error::SizeCap(format!(
            "more than {EXHAUSTIVE_NODE_CAP} game-tree nodes"
        )));
    }
    let class = vs.class();
    let k = class.label_count();
    let mut local: HashMap<Vec<Option<u32>>, f64> = HashMap::new();
    let mut eval = |c: &BudgetedVersionSpace| -> Result<f64> {
        let key = c.residuals();
        if let Some(&v) = local.get(&key) {
            return Ok(v);
        }
        let v = node(c, t - 1, nodes)?;
        local.insert(key, v);
        Ok(v)
    };
    let mut best = 0.0f64;
    for x in all_instances(vs) {
        let mut outcomes = Vec::with_capacity(k);
        for y in 0..k {
            let pos = vs.restrict_positive(&x, y);
            let neg = vs.restrict_negative(&x, y);
            outcomes.push(BanditOutcome {
                correct: if pos.is_realizable() {
                    Some(eval(&pos)?)
                } else {
                    None
                },
                incorrect: if neg.is_realizable() {
                    Some(1.0 + eval(&neg)?)
                } else {
                    None
                },
            });
        }
        let (v, _) = bandit_round_maximin(&outcomes)?;
        best = best.max(v);
    }
    Ok(best)
}

fn all_instances(vs: &BudgetedVersionSpace) -> Vec<Instance> {
    let class = vs.class();
    if let Some(dom) = class.domain_size() {
        return (0..dom).map(Instance::Point).collect();
    }
    let k = class.label_count();
    let n = class.hypothesis_count();
    let alive: Vec<usize> = vs.alive().collect();
    let total = k.pow(alive.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut p = vec![0; n];
            for &h in &alive {
                p[h] = code % k;
                code /= k;
            }
            Instance::Profile(p)
        })
        .collect()
}
