//! Scenario runs: audits, per-run bounds and reproducibility.

use mistakebound::classes::Op;
use mistakebound::scenario::{parse_scenarios, run_scenario, RunOptions, Scenario};
use mistakebound::verify::csv_without_runtime;
use mistakebound::Error;
use proptest::prelude::*;

fn scenario(json: &str) -> Scenario {
    parse_scenarios(json).unwrap().remove(0)
}

fn audited(seed: u64, trials: usize) -> RunOptions {
    RunOptions {
        seed: Some(seed),
        trials: Some(trials),
        horizon: None,
        audit: true,
    }
}

fn wp_planted(n: usize, k: usize, r: u32) -> Scenario {
    scenario(&format!(
        r#"{{"id": "wp", "mode": "bandit", "class": {{"kind": "experts", "n": {n}, "k": {k}, "r": {r}}},
            "learner": {{"name": "weighted_plurality"}},
            "adversary": {{"name": "oblivious", "planted": {{"target": 0, "length": 60, "corruptions": {r}}}}},
            "horizon": 60, "seed": 1, "trials": 50, "bound": "weighted_plurality"}}"#
    ))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn audited_rounds_are_consistent(seed in any::<u64>(), n in 2usize..=9, k in 2usize..=3, r in 0u32..=2) {
        prop_assume!(n >= k);
        let report = run_scenario(&wp_planted(n, k, r), &audited(seed, 20)).unwrap();
        prop_assert_eq!(report.certificates_ok, Some(true));
        prop_assert!(report.r_star_max.unwrap() <= r);
        let rounds = report.audit.as_ref().unwrap();
        prop_assert!(!rounds.is_empty());
        for a in rounds {
            prop_assert!(a.pi.validate().is_ok());
            prop_assert!(a.tau.validate().is_ok());
            prop_assert_eq!(a.op == Op::Correct, a.predicted == a.truth);
            prop_assert!(a.pi.prob(a.predicted) > 0.0);
            prop_assert!(a.tau.prob(a.truth) > 0.0);
            // Bandit feedback never reveals the label.
            prop_assert_eq!(a.record().revealed, None);
        }
    }

    #[test]
    fn weighted_plurality_stays_under_its_bound(seed in any::<u64>(), n in 2usize..=9, k in 2usize..=3, r in 0u32..=2) {
        prop_assume!(n >= k);
        let report = run_scenario(&wp_planted(n, k, r), &audited(seed, 50)).unwrap();
        prop_assert!(report.satisfied, "max {} vs {:?}", report.summary.max, report.bound);
    }

    #[test]
    fn same_seed_same_csv(seed in any::<u64>()) {
        let s = scenario(r#"{"id": "det", "mode": "bandit", "class": {"kind": "experts", "n": 4, "k": 2, "r": 1},
            "learner": {"name": "bandit_rand_soa"}, "adversary": {"name": "value_optimal"},
            "horizon": 8, "seed": 0, "trials": 30}"#);
        let opts = RunOptions { seed: Some(seed), ..RunOptions::default() };
        let a = csv_without_runtime(&[run_scenario(&s, &opts).unwrap()]).unwrap();
        let b = csv_without_runtime(&[run_scenario(&s, &opts).unwrap()]).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn doubling_trick_bounds_hold_with_hidden_budgets() {
    for r_star in 0..=4u32 {
        for bound in ["dt", "dt_small"] {
            let s = scenario(&format!(
                r#"{{"id": "dt", "mode": "bandit", "class": {{"kind": "experts", "n": 9, "k": 3, "r": {r_star}}},
                    "learner": {{"name": "dt"}},
                    "adversary": {{"name": "oblivious", "planted": {{"target": 4, "length": 80, "corruptions": {r_star}}}}},
                    "horizon": 80, "seed": 5, "trials": 200, "bound": "{bound}"}}"#
            ));
            let report = run_scenario(&s, &RunOptions::default()).unwrap();
            assert!(
                report.satisfied,
                "r* = {r_star}, {bound}: max {} vs {:?}",
                report.summary.max, report.bound
            );
        }
    }
}

#[test]
fn full_information_reveals_the_label() {
    let s = scenario(
        r#"{"id": "full", "mode": "full", "class": {"kind": "hdk", "d": 1, "k": 2},
            "learner": {"name": "soa"}, "adversary": {"name": "hdk_fullinfo"},
            "horizon": 6, "seed": 3, "trials": 1, "bound": "hdk_full"}"#,
    );
    let report = run_scenario(&s, &audited(3, 1)).unwrap();
    assert!(report.satisfied);
    for a in report.audit.unwrap() {
        assert_eq!(a.record().revealed, Some(a.truth));
    }
}

#[test]
fn value_optimal_adversary_meets_the_exact_value() {
    let s = scenario(
        r#"{"id": "vo", "mode": "bandit", "class": {"kind": "constant", "k": 3, "r": 1},
            "learner": {"name": "uniform"}, "adversary": {"name": "value_optimal", "horizon": 30},
            "horizon": 30, "seed": 8, "trials": 4000, "exact": true, "bound": "exact_lower"}"#,
    );
    let report = run_scenario(&s, &RunOptions::default()).unwrap();
    let exact = report.exact_value.unwrap();
    assert!((exact - 2.779805).abs() < 1e-5, "{exact}");
    assert!(
        report.satisfied,
        "mean {} vs exact {exact}",
        report.summary.mean
    );
}

#[test]
fn malformed_scenarios_name_the_line() {
    let err = parse_scenarios("[\n{\"id\": \"x\",\n \"mode\": \"sideways\"}]").unwrap_err();
    match err {
        Error::Config(msg) => assert!(msg.contains("line 3"), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }
}
