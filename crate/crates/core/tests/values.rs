//! Game values against reference numbers and structural properties.
//!
//! The reference values were computed by a separate brute-force recursion
//! over expert count vectors (and over per-label budgets for the constant
//! class), solving each round's matrix game with an off-the-shelf LP solver.

use std::sync::Arc;

use mistakebound::classes::{
    expert_version_space, BudgetedVersionSpace, ConceptClass, ExpertGameState,
};
use mistakebound::values::{
    solve_matrix_game, DetSolver, GameSolver, LossMatrix, PotentialConstants, SolverConfig,
};
use mistakebound::LabelDistribution;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn solver_for(class: ConceptClass) -> (Arc<ConceptClass>, GameSolver) {
    let class = Arc::new(class);
    let solver = GameSolver::new(class.clone(), SolverConfig::default());
    (class, solver)
}

#[test]
fn experts_values_match_reference() {
    // (k, n, r, horizon, value)
    let table: [(usize, u32, u32, u32, f64); 5] = [
        (2, 2, 0, 10, 0.5),
        (2, 4, 1, 12, 2.3740234375),
        (3, 3, 1, 10, 2.779804078151218),
        (2, 8, 1, 10, 2.9921875),
        (3, 9, 2, 20, 6.262632791074613),
    ];
    for (k, n, r, t, want) in table {
        let (_, solver) = solver_for(ConceptClass::experts(k, k).unwrap());
        let got = solver
            .expert_state_value(&ExpertGameState::fresh(n, k, r), t)
            .unwrap()
            .value;
        assert!(
            (got - want).abs() < TOL,
            "k={k} n={n} r={r} T={t}: {got} vs {want}"
        );
    }
}

#[test]
fn full_class_recursion_agrees_on_small_experts() {
    for (k, n, r, t, want) in [
        (2usize, 2usize, 0u32, 10u32, 0.5),
        (3, 3, 1, 10, 2.779804078151218),
    ] {
        let (class, solver) = solver_for(ConceptClass::experts(n, k).unwrap());
        let vs = BudgetedVersionSpace::uniform(class, r);
        let got = solver.primal_value(&vs, t).unwrap().value;
        assert!(
            (got - want).abs() < TOL,
            "k={k} n={n} r={r}: {got} vs {want}"
        );
    }
}

#[test]
fn constant_class_values_match_reference() {
    for (k, r, want) in [
        (2usize, 1u32, 1.748046875),
        (3, 1, 2.779804078151201),
        (2, 2, 2.9140625),
    ] {
        let (class, solver) = solver_for(ConceptClass::constant(k, 1).unwrap());
        let vs = BudgetedVersionSpace::uniform(class, r);
        let got = solver.primal_value(&vs, 10).unwrap().value;
        assert!((got - want).abs() < TOL, "k={k} r={r}: {got} vs {want}");
    }
}

#[test]
fn constant_class_limits() {
    // Without budget the learner eliminates one label per mistake: (k-1)/2.
    for k in [2usize, 3, 5] {
        let (class, solver) = solver_for(ConceptClass::constant(k, 1).unwrap());
        let v = solver
            .stabilized_value(&BudgetedVersionSpace::uniform(class, 0))
            .unwrap();
        assert!(v.stabilized);
        assert!(
            (v.value - (k as f64 - 1.0) / 2.0).abs() < TOL,
            "k={k}: {}",
            v.value
        );
    }
    for (r, limit) in [(1u32, 1.75), (2, 47.0 / 16.0)] {
        let (class, solver) = solver_for(ConceptClass::constant(2, 1).unwrap());
        let v = solver
            .stabilized_value(&BudgetedVersionSpace::uniform(class, r))
            .unwrap();
        assert!((v.value - limit).abs() < 1e-7, "r={r}: {}", v.value);
    }
}

#[test]
fn hdk_deterministic_values() {
    // (d, k, exact bandit value); full information is d + 1 and bandit at
    // least d k, the bandit numbers are regression values of this solver.
    for (d, k, bandit) in [(1usize, 2usize, 3u32), (1, 3, 5), (2, 2, 5), (2, 3, 8)] {
        let class = Arc::new(ConceptClass::hdk(d, k, 1_000_000).unwrap());
        let solver = DetSolver::new(class.clone(), 5_000_000);
        let vs = BudgetedVersionSpace::uniform(class, 0);
        let full = solver.opt_full_det(&vs).unwrap().value;
        let band = solver.opt_bandit_det(&vs).unwrap().value;
        assert_eq!(full, (d + 1) as f64, "H({d},{k}) full");
        assert!(band >= (d * k) as f64, "H({d},{k}) bandit {band}");
        assert_eq!(band, bandit as f64, "H({d},{k}) bandit");
    }
}

fn count_state() -> impl Strategy<Value = ExpertGameState> {
    (2usize..=3, prop::collection::vec(0u32..=2, 1..=3))
        .prop_filter("non-empty", |(_, m)| m.iter().sum::<u32>() > 0)
        .prop_map(|(k, m)| ExpertGameState::new(m, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn primal_dual_and_count_recursion_agree(m in count_state(), t in 0u32..=3) {
        let vs = expert_version_space(&m).unwrap();
        let solver = GameSolver::new(vs.class().clone(), SolverConfig::default());
        let p = solver.primal_value(&vs, t).unwrap().value;
        let d = solver.dual_value(&vs, t).unwrap().value;
        let (_, counts) = solver_for(ConceptClass::experts(m.k, m.k).unwrap());
        let c = counts.expert_state_value(&m, t).unwrap().value;
        prop_assert!((p - d).abs() < TOL, "primal {p} dual {d}");
        prop_assert!((p - c).abs() < TOL, "primal {p} counts {c}");
    }

    #[test]
    fn values_grow_with_horizon_and_respect_the_potential(m in count_state(), t in 0u32..=5) {
        let (_, solver) = solver_for(ConceptClass::experts(m.k, m.k).unwrap());
        let a = solver.expert_state_value(&m, t).unwrap().value;
        let b = solver.expert_state_value(&m, t + 1).unwrap().value;
        prop_assert!(a <= b + TOL);
        prop_assert!(a >= 0.0);
        let bound = PotentialConstants::new(m.k).value_bound(&m);
        prop_assert!(b <= bound + TOL, "{b} > {bound}");
    }

    #[test]
    fn matrix_solutions_are_optimal(rows in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 3), 2..=4)) {
        let l = LossMatrix::new(rows.clone()).unwrap();
        let sol = solve_matrix_game(&l).unwrap();
        LabelDistribution::new(sol.learner.clone()).unwrap();
        LabelDistribution::new(sol.adversary.clone()).unwrap();
        for c in 0..3 {
            let loss: f64 = rows.iter().zip(&sol.learner).map(|(row, p)| p * row[c]).sum();
            prop_assert!(loss <= sol.value + TOL, "column {c}: {loss} > {}", sol.value);
        }
        for row in &rows {
            let gain: f64 = row.iter().zip(&sol.adversary).map(|(x, q)| q * x).sum();
            prop_assert!(gain >= sol.value - TOL, "row: {gain} < {}", sol.value);
        }
        prop_assert!(sol.residual.abs() <= TOL);
    }

    #[test]
    fn solver_rounding_is_cleaned_up(
        w in prop::collection::vec(0.0f64..10.0, 1..=6),
        noise in prop::collection::vec(-1e-9f64..1e-9, 6),
    ) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-3);
        let noisy: Vec<f64> = w.iter().zip(&noise).map(|(x, e)| x / total + e).collect();
        let d = LabelDistribution::from_weights(&noisy).unwrap();
        prop_assert!(d.validate().is_ok());
        prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Far from normalized input is rejected.
        let doubled: Vec<f64> = noisy.iter().map(|x| 2.0 * x).collect();
        prop_assert!(LabelDistribution::from_weights(&doubled).is_err());
    }
}
