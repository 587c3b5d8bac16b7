//! Properties of the lower-bound adversaries over many seeds and sizes.

use std::sync::Arc;

use mistakebound::adversaries::{
    certify_count, BudgetLabelAdversary, EvenSplitEliminator, GeometricAdaptive, HdkAdversary,
    RandomTargetOblivious,
};
use mistakebound::classes::{ConceptClass, Op};
use mistakebound::engine::{run_bandit_game, Learner, Mode, RunResult};
use mistakebound::learners::{Alpha, SoaLearner, UniformLearner, WeightedPlurality};
use mistakebound::values::DetSolver;
use mistakebound::Error;
use proptest::prelude::*;

/// The certificate is present, recounts to the same number and stays
/// within its budget.
fn assert_certificate(class: &ConceptClass, run: &RunResult, budget: u32) {
    let cert = run.certificate.as_ref().expect("adversary names a witness");
    assert_eq!(
        certify_count(class, cert.hypothesis, &run.transcript),
        cert.inconsistencies
    );
    assert!(cert.inconsistencies <= budget, "{cert:?}");
}

fn wp(n: usize, k: usize, r: u32) -> WeightedPlurality {
    WeightedPlurality::new(n, k, r, Alpha::Finite(std::f64::consts::E)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn even_split_keeps_a_fraction_alive(k in 3usize..=5, extra in 0usize..40, alpha_inf in any::<bool>()) {
        let n = k + extra;
        let mut adv = EvenSplitEliminator::new(n, k).unwrap();
        let declared = adv.declared().clone();
        let alpha = if alpha_inf { Alpha::Infinite } else { Alpha::Finite(std::f64::consts::E) };
        let mut learner = WeightedPlurality::new(n, k, 0, alpha).unwrap();
        let run = run_bandit_game(&declared, &mut learner, &mut adv, 4 * n, 0).unwrap();
        let hist = adv.alive_history();
        for w in hist.windows(2) {
            if w[0] > k {
                prop_assert!(w[1] as f64 >= (1.0 - 2.0 / k as f64) * w[0] as f64 - 1e-12, "{hist:?}");
            }
        }
        // Every scripted round is a mistake.
        prop_assert!(run.transcript.records[..adv.scripted_rounds()].iter().all(|r| r.op == Op::Incorrect));
        let cert = run.certificate.as_ref().unwrap();
        prop_assert_eq!(cert.inconsistencies, 0);
        assert_certificate(declared.class(), &run, 0);
    }

    #[test]
    fn budget_label_transcripts_are_all_negative(k in 2usize..=3, r in 0u32..=2, use_soa in any::<bool>()) {
        let mut adv = BudgetLabelAdversary::new(k, r).unwrap();
        let declared = adv.declared();
        let mut learner: Box<dyn Learner> = if use_soa {
            let solver = Arc::new(DetSolver::new(declared.class().clone(), 1_000_000));
            Box::new(SoaLearner::new(solver, declared.clone(), Mode::Bandit))
        } else {
            Box::new(wp(k, k, r))
        };
        let run = run_bandit_game(&declared, learner.as_mut(), &mut adv, 40, 7).unwrap();
        let scripted = adv.scripted_horizon();
        prop_assert_eq!(scripted, k * (r as usize + 1) - 1);
        prop_assert!(run.transcript.records[..scripted].iter().all(|r| r.op == Op::Incorrect));
        prop_assert!(run.mistakes >= scripted);
        assert_certificate(declared.class(), &run, r);
    }

    #[test]
    fn geometric_stops_within_kr_over_two(k in 2usize..=4, half in 0u32..=3, seed in any::<u64>()) {
        let r = 2 * half;
        let mut adv = GeometricAdaptive::new(k, r, seed).unwrap();
        let declared = adv.declared();
        let mut learner = UniformLearner::new(k);
        let run = run_bandit_game(&declared, &mut learner, &mut adv, 1000, seed).unwrap();
        prop_assert!(run.rounds.len() <= k * r as usize / 2);
        prop_assert!(adv.correct_predictions() <= r / 2);
        assert_certificate(declared.class(), &run, r);
    }

    #[test]
    fn random_target_plays_m_blocks_of_k(k in 2usize..=3, m in 1usize..=4, seed in any::<u64>()) {
        let mut adv = RandomTargetOblivious::new(k, m, seed).unwrap();
        let declared = adv.declared();
        let mut learner = UniformLearner::new(k);
        let run = run_bandit_game(&declared, &mut learner, &mut adv, 10 * k * m, seed).unwrap();
        prop_assert_eq!(run.rounds.len(), k * m);
        for (block, rounds) in run.rounds.chunks(k).enumerate() {
            prop_assert_eq!(rounds.len(), k);
            prop_assert!(rounds.iter().all(|a| a.instance == rounds[0].instance), "block {}", block);
        }
        for pair in run.rounds.chunks(k).collect::<Vec<_>>().windows(2) {
            prop_assert_ne!(&pair[0][0].instance, &pair[1][0].instance);
        }
        prop_assert_eq!(run.certificate.as_ref().unwrap().hypothesis, adv.target());
        assert_certificate(declared.class(), &run, 0);
    }
}

#[test]
fn odd_geometric_budget_is_refused() {
    assert!(matches!(
        GeometricAdaptive::new(2, 3, 0),
        Err(Error::OddBudget(3))
    ));
}

#[test]
fn hdk_adversary_forces_dk_negative_rounds() {
    for (d, k) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
        let mut adv = HdkAdversary::new(d, k).unwrap();
        let declared = adv.declared();
        let solver = Arc::new(DetSolver::new(declared.class().clone(), 5_000_000));
        let mut learner = SoaLearner::new(solver, declared.clone(), Mode::Bandit);
        let run = run_bandit_game(&declared, &mut learner, &mut adv, 30, 1).unwrap();
        let scripted = adv.scripted_horizon();
        assert_eq!(scripted, d * k);
        assert!(run.transcript.records[..scripted]
            .iter()
            .all(|r| r.op == Op::Incorrect));
        assert!(run.mistakes >= d * k);
        assert_certificate(declared.class(), &run, 0);
    }
}

#[test]
fn hdk_adversary_refuses_randomized_learners() {
    let mut adv = HdkAdversary::new(1, 2).unwrap();
    let declared = adv.declared();
    let mut learner = UniformLearner::new(3);
    let err = run_bandit_game(&declared, &mut learner, &mut adv, 5, 0).unwrap_err();
    assert!(
        matches!(err, Error::NonDeterministicLearner { .. }),
        "{err:?}"
    );
}

#[test]
fn even_split_forces_the_stated_mistakes() {
    for (n, k) in [(27usize, 3usize), (16, 4)] {
        let bound = ((k as f64 / 2.0 - 1.0) * (n as f64 / k as f64).ln()).ceil() as usize;
        let mut adv = EvenSplitEliminator::new(n, k).unwrap();
        let declared = adv.declared().clone();
        let mut learner = wp(n, k, 0);
        let run = run_bandit_game(&declared, &mut learner, &mut adv, 60, 0).unwrap();
        assert!(
            run.mistakes >= bound,
            "n = {n}, k = {k}: {} < {bound}",
            run.mistakes
        );
    }
}
