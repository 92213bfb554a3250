mod common;

use ethiplan::{evaluate, IntrinsicValue, PlanningModel, PrincipleId, SearchBudget};
use ethiplan_oracles::all_sequences;
use proptest::prelude::*;

const ALL: [PrincipleId; 5] = [
    PrincipleId::Deontology,
    PrincipleId::ActUtilitarian,
    PrincipleId::DoNoHarm,
    PrincipleId::DoNoInstrumentalHarm,
    PrincipleId::DoubleEffect,
];

fn budget() -> SearchBudget {
    SearchBudget::default().with_depth(4)
}

/// Goal-reaching plans of up to three steps, found by brute force.
fn plans(m: &PlanningModel) -> Vec<ethiplan::Plan> {
    all_sequences(m, 3)
        .into_iter()
        .filter(|r| r.reaches(&m.goal))
        .map(|r| m.execute(&r.steps).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn verdict_agrees_with_its_formula(seed in any::<u64>()) {
        let m = common::model(seed);
        for plan in plans(&m) {
            for p in ALL {
                let v = evaluate(p, &m, &plan, budget()).unwrap();
                prop_assert_eq!(v.permissible, v.formula.holds());
                prop_assert_eq!(v.principle, p);
            }
        }
    }

    #[test]
    fn deontology_is_the_structural_check(seed in any::<u64>()) {
        let m = common::model(seed);
        for plan in plans(&m) {
            let v = evaluate(PrincipleId::Deontology, &m, &plan, budget()).unwrap();
            let has_bad = plan
                .steps
                .iter()
                .any(|s| m.action(s).unwrap().intrinsic == IntrinsicValue::Bad);
            prop_assert_eq!(v.permissible, !has_bad);
        }
    }

    #[test]
    fn double_effect_implies_deontology_and_no_instrumental_harm(seed in any::<u64>()) {
        let m = common::model(seed);
        for plan in plans(&m) {
            if evaluate(PrincipleId::DoubleEffect, &m, &plan, budget()).unwrap().permissible {
                prop_assert!(evaluate(PrincipleId::Deontology, &m, &plan, budget()).unwrap().permissible);
                prop_assert!(evaluate(PrincipleId::DoNoInstrumentalHarm, &m, &plan, budget()).unwrap().permissible);
            }
        }
    }

    #[test]
    fn harmless_traces_pass_do_no_harm(seed in any::<u64>()) {
        let m = common::model(seed);
        for plan in plans(&m) {
            // No harm appears that init lacked, and no harm from init is deleted
            // (a deleted harm could be re-added, which counts as causing it).
            let harmless = plan.trace.iter().all(|s| {
                m.facts.iter().filter(|f| m.utility.is_harm(f)).all(|f| s.contains(f) == m.init.contains(f))
            });
            if harmless {
                prop_assert!(evaluate(PrincipleId::DoNoHarm, &m, &plan, budget()).unwrap().permissible);
            }
        }
    }

    #[test]
    fn same_final_state_same_utilitarian_verdict(seed in any::<u64>()) {
        let m = common::model(seed);
        let ps = plans(&m);
        for p in &ps {
            for q in &ps {
                if p.final_state() == q.final_state() {
                    let a = evaluate(PrincipleId::ActUtilitarian, &m, p, budget()).unwrap();
                    let b = evaluate(PrincipleId::ActUtilitarian, &m, q, budget()).unwrap();
                    prop_assert_eq!(a.permissible, b.permissible);
                }
            }
        }
    }
}

#[test]
fn invalid_plans_are_rejected() {
    let m = ethiplan::fixtures::robot_and_frank();
    let mut plan = m.execute(&["lie_frank", "exercise"]).unwrap();
    plan.steps.reverse();
    assert!(matches!(
        evaluate(PrincipleId::Deontology, &m, &plan, budget()),
        Err(ethiplan::EthicsError::InvalidPlan(_))
    ));
}
