use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;

use super::matrix::{
    bandit_round_maximin, solve_matrix_game, BanditOutcome, LossMatrix, MatrixSolution,
};
use super::splits::{canonical_splits, split_children, Split};
use super::{stabilize, GameValue, STABILITY_TOLERANCE};
use crate::classes::{
    expert_state_of, BudgetedVersionSpace, ConceptClass, ExpertGameState, Instance, StateKey,
};
use crate::dist::{Label, LabelDistribution};
use crate::error::{Error, Result};

/// Knobs of the value solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Successive-horizon convergence threshold.
    pub tolerance: f64,
    /// Maximum number of memo entries per table.
    pub state_cap: usize,
    /// Horizon cap for stabilization; `None` uses [`default_horizon_cap`].
    pub horizon_cap: Option<u32>,
    /// Largest number of profiles enumerated per experts state.
    pub profile_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: STABILITY_TOLERANCE,
            state_cap: 1_000_000,
            horizon_cap: None,
            profile_cap: 1_000_000,
        }
    }
}

/// Horizon cap used when none is configured.
///
/// The base is `ceil(k (log_k n + 2r)) + 8`. With positive budgets values
/// converge only geometrically in the horizon, so every budget level adds a
/// further `40 k` rounds.
pub fn default_horizon_cap(k: usize, n: usize, r: u32) -> u32 {
    let kf = k as f64;
    let n = n.max(1) as f64;
    let base = (kf * (n.ln() / kf.ln() + 2.0 * r as f64)).ceil() as u32 + 8;
    base + 40 * k as u32 * r
}

/// The matrix game of one round at a fixed instance.
#[derive(Debug, Clone)]
pub struct RoundGame {
    pub instance: Instance,
    pub matrix: LossMatrix,
    pub solution: MatrixSolution,
    /// Learner's optimal mix over all labels.
    pub learner: LabelDistribution,
    /// Adversary's optimal mix over all labels (zero on unrealizable ones).
    pub adversary: LabelDistribution,
}

impl RoundGame {
    pub fn value(&self) -> f64 {
        self.solution.value
    }
}

type Memo<K> = DashMap<(K, u32), f64>;

/// Memoized solver for the randomized games of one class.
///
/// All methods take `&self`; the memo tables are concurrent maps, so a
/// solver can be shared behind an `Arc` by many learners and adversaries.
pub struct GameSolver {
    class: Arc<ConceptClass>,
    cfg: SolverConfig,
    primal: Memo<StateKey>,
    dual: Memo<StateKey>,
    full_rand: Memo<StateKey>,
    experts: Memo<Vec<u32>>,
    splits: DashMap<Vec<u32>, Arc<Vec<Split>>>,
    stabilized: DashMap<StateKey, GameValue>,
    max_residual: AtomicU64,
}

impl std::fmt::Debug for GameSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameSolver")
            .field("class", &self.class.kind())
            .field("primal_states", &self.primal.len())
            .field("expert_states", &self.experts.len())
            .finish()
    }
}

impl GameSolver {
    pub fn new(class: Arc<ConceptClass>, cfg: SolverConfig) -> Self {
        GameSolver {
            class,
            cfg,
            primal: DashMap::new(),
            dual: DashMap::new(),
            full_rand: DashMap::new(),
            experts: DashMap::new(),
            splits: DashMap::new(),
            stabilized: DashMap::new(),
            max_residual: AtomicU64::new(0f64.to_bits()),
        }
    }

    pub fn class(&self) -> &Arc<ConceptClass> {
        &self.class
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Largest duality gap among all matrix games solved so far.
    pub fn max_residual(&self) -> f64 {
        f64::from_bits(self.max_residual.load(Ordering::Relaxed))
    }

    /// Memo sizes: (primal, dual, experts, full-information).
    pub fn memo_sizes(&self) -> (usize, usize, usize, usize) {
        (
            self.primal.len(),
            self.dual.len(),
            self.experts.len(),
            self.full_rand.len(),
        )
    }

    /// Every expert count vector with a memoized value.
    pub fn memoized_expert_states(&self) -> Vec<Vec<u32>> {
        let mut v: Vec<Vec<u32>> = self.experts.iter().map(|e| e.key().0.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    fn note_residual(&self, r: f64) {
        // Non-negative floats order like their bit patterns.
        self.max_residual
            .fetch_max(r.max(0.0).to_bits(), Ordering::Relaxed);
    }

    fn check_cap<K>(&self, memo: &Memo<K>) -> Result<()>
    where
        K: std::hash::Hash + Eq,
    {
        if memo.len() >= self.cfg.state_cap {
            Err(Error::StateSpaceCap {
                cap: self.cfg.state_cap,
            })
        } else {
            Ok(())
        }
    }

    fn check_vs(&self, vs: &BudgetedVersionSpace) -> Result<()> {
        if !Arc::ptr_eq(vs.class(), &self.class) && **vs.class() != *self.class {
            return Err(Error::InvalidClass(
                "version space belongs to another class".into(),
            ));
        }
        if !vs.is_realizable() {
            return Err(Error::Unrealizable);
        }
        Ok(())
    }

    /// The horizon cap for a state.
    pub fn horizon_cap(&self, vs: &BudgetedVersionSpace) -> u32 {
        self.cfg.horizon_cap.unwrap_or_else(|| {
            let r = vs.alive().filter_map(|h| vs.budget(h)).max().unwrap_or(0);
            default_horizon_cap(self.class.label_count(), vs.alive_count(), r)
        })
    }

    /// Instances the adversary may present in state `vs`: every point of a
    /// tabulated class, or every labeling of the alive experts (dead ones
    /// are fixed to label 0).
    pub fn instances(&self, vs: &BudgetedVersionSpace) -> Result<Vec<Instance>> {
        if let Some(dom) = self.class.domain_size() {
            return Ok((0..dom).map(Instance::Point).collect());
        }
        let k = self.class.label_count();
        let alive: Vec<usize> = vs.alive().collect();
        let count = (k as f64).powi(alive.len() as i32);
        if count > self.cfg.profile_cap as f64 {
            return Err(Error::SizeCap(format!(
                "{count} profiles over {} alive experts",
                alive.len()
            )));
        }
        let n = self.class.hypothesis_count();
        let mut out = Vec::with_capacity(count as usize);
        let mut digits = vec![0usize; alive.len()];
        loop {
            let mut p = vec![0; n];
            for (j, &h) in alive.iter().enumerate() {
                p[h] = digits[j];
            }
            out.push(Instance::Profile(p));
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(out);
                }
                digits[i] += 1;
                if digits[i] < k {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    // ----- bandit primal game ------------------------------------------------

    /// Value of the bandit game from `vs` over `horizon` rounds, by the
    /// primal recursion over instances (profiles for experts) with the
    /// learner's LP solved at every node.
    pub fn primal_value(&self, vs: &BudgetedVersionSpace, horizon: u32) -> Result<GameValue> {
        self.check_vs(vs)?;
        let v = self.primal_rec(vs, horizon)?;
        Ok(GameValue {
            lp_residual: self.max_residual(),
            ..GameValue::at(v, horizon)
        })
    }

    fn primal_rec(&self, vs: &BudgetedVersionSpace, t: u32) -> Result<f64> {
        if t == 0 {
            return Ok(0.0);
        }
        let key = (vs.state_key(), t);
        if let Some(v) = self.primal.get(&key).map(|e| *e) {
            return Ok(v);
        }
        self.check_cap(&self.primal)?;
        let mut best = 0.0f64;
        for x in self.instances(vs)? {
            let m = self.bandit_matrix(vs, &x, &mut |c| self.primal_rec(c, t - 1))?;
            let s = solve_matrix_game(&m)?;
            self.note_residual(s.residual);
            best = best.max(s.value);
        }
        self.primal.insert(key, best);
        Ok(best)
    }

    /// Bandit loss matrix at `x` with continuation values from `cont`.
    /// Columns are the labels whose positive feedback is realizable.
    fn bandit_matrix(
        &self,
        vs: &BudgetedVersionSpace,
        x: &Instance,
        cont: &mut dyn FnMut(&BudgetedVersionSpace) -> Result<f64>,
    ) -> Result<LossMatrix> {
        let k = self.class.label_count();
        let mut diag = vec![None; k];
        let mut off = vec![None; k];
        for (y, slot) in diag.iter_mut().enumerate() {
            let pos = vs.restrict_positive(x, y);
            if pos.is_realizable() {
                *slot = Some(cont(&pos)?);
            }
        }
        let realizable: Vec<Label> = (0..k).filter(|&y| diag[y].is_some()).collect();
        if realizable.is_empty() {
            return Err(Error::Unrealizable);
        }
        for (y, slot) in off.iter_mut().enumerate() {
            // The miss row matters only if some other column exists.
            if realizable.iter().any(|&c| c != y) {
                let neg = vs.restrict_negative(x, y);
                debug_assert!(neg.is_realizable());
                *slot = Some(1.0 + cont(&neg)?);
            }
        }
        let rows = (0..k)
            .map(|r| {
                realizable
                    .iter()
                    .map(|&c| {
                        if c == r {
                            diag[r].unwrap()
                        } else {
                            off[r].unwrap()
                        }
                    })
                    .collect()
            })
            .collect();
        LossMatrix::with_columns(rows, realizable)
    }

    // ----- bandit dual game --------------------------------------------------

    /// Value of the dual bandit game (the adversary reveals `tau` first),
    /// solved per instance by the water-filling maximin.
    pub fn dual_value(&self, vs: &BudgetedVersionSpace, horizon: u32) -> Result<GameValue> {
        self.check_vs(vs)?;
        Ok(GameValue::at(self.dual_rec(vs, horizon)?, horizon))
    }

    fn dual_rec(&self, vs: &BudgetedVersionSpace, t: u32) -> Result<f64> {
        if t == 0 {
            return Ok(0.0);
        }
        let key = (vs.state_key(), t);
        if let Some(v) = self.dual.get(&key).map(|e| *e) {
            return Ok(v);
        }
        self.check_cap(&self.dual)?;
        let k = self.class.label_count();
        let mut best = 0.0f64;
        for x in self.instances(vs)? {
            let mut outcomes = Vec::with_capacity(k);
            for y in 0..k {
                let pos = vs.restrict_positive(&x, y);
                let neg = vs.restrict_negative(&x, y);
                outcomes.push(BanditOutcome {
                    correct: if pos.is_realizable() {
                        Some(self.dual_rec(&pos, t - 1)?)
                    } else {
                        None
                    },
                    incorrect: if neg.is_realizable() {
                        Some(1.0 + self.dual_rec(&neg, t - 1)?)
                    } else {
                        None
                    },
                });
            }
            let (v, _) = bandit_round_maximin(&outcomes)?;
            best = best.max(v);
        }
        self.dual.insert(key, best);
        Ok(best)
    }

    // ----- experts state recursion -------------------------------------------

    /// Value of the experts game from count vector `m`, enumerating
    /// assignments of experts to labels up to symmetry.
    ///
    /// Rounds that cannot change the state (every expert agrees and none has
    /// budget left) are skipped; they are worth `V(m, T-1) <= V(m, T)`.
    pub fn expert_state_value(&self, m: &ExpertGameState, horizon: u32) -> Result<GameValue> {
        if m.k != self.class.label_count() {
            return Err(Error::InvalidClass(format!(
                "state has k = {} but the solver class has k = {}",
                m.k,
                self.class.label_count()
            )));
        }
        if m.is_empty() {
            return Err(Error::Unrealizable);
        }
        let v = self.expert_rec(&m.m, horizon)?;
        Ok(GameValue {
            lp_residual: self.max_residual(),
            ..GameValue::at(v, horizon)
        })
    }

    fn splits_of(&self, m: &[u32]) -> Arc<Vec<Split>> {
        if let Some(s) = self.splits.get(m).map(|e| Arc::clone(&e)) {
            return s;
        }
        let s = Arc::new(canonical_splits(m, self.class.label_count()));
        self.splits.insert(m.to_vec(), Arc::clone(&s));
        s
    }

    fn expert_rec(&self, m: &[u32], t: u32) -> Result<f64> {
        if t == 0 || m.iter().all(|&c| c == 0) {
            return Ok(0.0);
        }
        let key = (m.to_vec(), t);
        if let Some(v) = self.experts.get(&key).map(|e| *e) {
            return Ok(v);
        }
        self.check_cap(&self.experts)?;
        let all_zero_budget = m.iter().skip(1).all(|&c| c == 0);
        let mut best = 0.0f64;
        for split in self.splits_of(m).iter() {
            if all_zero_budget && split.used_labels() <= 1 {
                continue;
            }
            let g = self.split_matrix(split, t - 1)?;
            let s = solve_matrix_game(&g)?;
            self.note_residual(s.residual);
            best = best.max(s.value);
        }
        self.experts.insert(key, best);
        Ok(best)
    }

    fn split_matrix(&self, split: &Split, cont_t: u32) -> Result<LossMatrix> {
        let k = split.k;
        let mut diag = vec![None; k];
        let mut off = vec![None; k];
        for y in 0..k {
            let (pos, neg) = split_children(split, y);
            if pos.iter().any(|&c| c > 0) {
                diag[y] = Some(self.expert_rec(&pos, cont_t)?);
            }
            if neg.iter().any(|&c| c > 0) {
                off[y] = Some(1.0 + self.expert_rec(&neg, cont_t)?);
            }
        }
        let realizable: Vec<Label> = (0..k).filter(|&y| diag[y].is_some()).collect();
        let rows = (0..k)
            .map(|r| {
                realizable
                    .iter()
                    .map(|&c| {
                        if c == r {
                            diag[r].unwrap()
                        } else {
                            off[r].expect("another realizable column keeps the miss branch alive")
                        }
                    })
                    .collect()
            })
            .collect();
        LossMatrix::with_columns(rows, realizable)
    }

    // ----- dispatch ----------------------------------------------------------

    /// Bandit value of `vs`, through the experts recursion when the class is
    /// an experts class and through the primal recursion otherwise.
    pub fn state_value(&self, vs: &BudgetedVersionSpace, horizon: u32) -> Result<f64> {
        self.check_vs(vs)?;
        if self.class.is_experts() {
            self.expert_rec(&expert_state_of(vs)?.m, horizon)
        } else {
            self.primal_rec(vs, horizon)
        }
    }

    /// Stabilized bandit value of `vs` (cached per state).
    pub fn stabilized_value(&self, vs: &BudgetedVersionSpace) -> Result<GameValue> {
        self.check_vs(vs)?;
        let key = vs.state_key();
        if let Some(v) = self.stabilized.get(&key).map(|e| *e) {
            return Ok(v);
        }
        let cap = self.horizon_cap(vs);
        let mut v = stabilize(|t| self.state_value(vs, t), cap, self.cfg.tolerance)?;
        v.lp_residual = self.max_residual();
        self.stabilized.insert(key, v);
        Ok(v)
    }

    /// Stabilized value of the experts state `m`.
    pub fn stabilized_expert_value(&self, m: &ExpertGameState) -> Result<GameValue> {
        let cap = self.cfg.horizon_cap.unwrap_or_else(|| {
            let r = m.m.iter().rposition(|&c| c > 0).unwrap_or(0) as u32;
            default_horizon_cap(m.k, m.total() as usize, r)
        });
        let mut v = stabilize(
            |t| self.expert_state_value(m, t).map(|g| g.value),
            cap,
            self.cfg.tolerance,
        )?;
        v.lp_residual = self.max_residual();
        Ok(v)
    }

    /// The round game at `x` with continuations valued at `cont_horizon`.
    pub fn round_game(
        &self,
        vs: &BudgetedVersionSpace,
        x: &Instance,
        cont_horizon: u32,
    ) -> Result<RoundGame> {
        self.check_vs(vs)?;
        self.class.check_instance(x)?;
        let matrix = self.bandit_matrix(vs, x, &mut |c| self.state_value(c, cont_horizon))?;
        let solution = solve_matrix_game(&matrix)?;
        self.note_residual(solution.residual);
        let k = self.class.label_count();
        let learner = LabelDistribution::from_weights(&solution.learner)?;
        let mut tau = vec![0.0; k];
        for (c, &y) in matrix.col_labels().iter().enumerate() {
            tau[y] = solution.adversary[c];
        }
        let adversary = LabelDistribution::from_weights(&tau)?;
        Ok(RoundGame {
            instance: x.clone(),
            matrix,
            solution,
            learner,
            adversary,
        })
    }

    /// The instance maximizing the round value, with its value. Ties go to
    /// the earliest instance in canonical order: points by index, experts by
    /// the order of [`canonical_splits`].
    pub fn best_instance(
        &self,
        vs: &BudgetedVersionSpace,
        cont_horizon: u32,
    ) -> Result<(Instance, f64)> {
        self.check_vs(vs)?;
        let candidates: Vec<Instance> = if self.class.is_experts() {
            let m = expert_state_of(vs)?;
            self.splits_of(&m.m)
                .iter()
                .map(|s| split_to_profile(vs, s))
                .collect()
        } else {
            self.instances(vs)?
        };
        let mut best: Option<(Instance, f64)> = None;
        for x in candidates {
            let v = self.round_game(vs, &x, cont_horizon)?.value();
            if best.as_ref().is_none_or(|(_, b)| v > *b + 1e-12) {
                best = Some((x, v));
            }
        }
        best.ok_or(Error::Unrealizable)
    }

    // ----- full-information randomized game ----------------------------------

    /// Randomized full-information value from `vs` over `horizon` rounds.
    pub fn full_rand_value(&self, vs: &BudgetedVersionSpace, horizon: u32) -> Result<GameValue> {
        self.check_vs(vs)?;
        let v = self.full_rand_rec(vs, horizon)?;
        Ok(GameValue {
            lp_residual: self.max_residual(),
            ..GameValue::at(v, horizon)
        })
    }

    /// Stabilized randomized full-information value.
    pub fn opt_full_rand(&self, vs: &BudgetedVersionSpace) -> Result<GameValue> {
        self.check_vs(vs)?;
        let cap = self.horizon_cap(vs);
        let mut v = stabilize(|t| self.full_rand_rec(vs, t), cap, self.cfg.tolerance)?;
        v.lp_residual = self.max_residual();
        Ok(v)
    }

    fn full_rand_rec(&self, vs: &BudgetedVersionSpace, t: u32) -> Result<f64> {
        if t == 0 {
            return Ok(0.0);
        }
        let key = (vs.state_key(), t);
        if let Some(v) = self.full_rand.get(&key).map(|e| *e) {
            return Ok(v);
        }
        self.check_cap(&self.full_rand)?;
        let k = self.class.label_count();
        let mut best = 0.0f64;
        for x in self.instances(vs)? {
            let mut cols = Vec::new();
            let mut cont = Vec::new();
            for y in 0..k {
                let pos = vs.restrict_positive(&x, y);
                if pos.is_realizable() {
                    cols.push(y);
                    cont.push(self.full_rand_rec(&pos, t - 1)?);
                }
            }
            let rows = (0..k)
                .map(|r| {
                    cols.iter()
                        .zip(&cont)
                        .map(|(&c, &v)| if c == r { v } else { 1.0 + v })
                        .collect()
                })
                .collect();
            let s = solve_matrix_game(&LossMatrix::with_columns(rows, cols)?)?;
            self.note_residual(s.residual);
            best = best.max(s.value);
        }
        self.full_rand.insert(key, best);
        Ok(best)
    }
}

/// Realizes a canonical split as a concrete profile on `vs`: within each
/// budget level, alive experts are handed out to labels in index order.
pub(crate) fn split_to_profile(vs: &BudgetedVersionSpace, split: &Split) -> Instance {
    let n = vs.class().hypothesis_count();
    let mut profile = vec![0; n];
    for level in 0..split.levels {
        let mut experts = vs.alive().filter(|&h| vs.budget(h) == Some(level as u32));
        for y in 0..split.k {
            for _ in 0..split.part(y)[level] {
                let h = experts.next().expect("split matches the state");
                profile[h] = y;
            }
        }
    }
    Instance::Profile(profile)
}
