mod common;

use std::collections::BTreeSet;

use ethiplan::{enumerate_plans, find_plan, Objective, PlanError, SearchBudget};
use ethiplan_oracles::{min_cost, simple_path_plans};
use proptest::prelude::*;

const DEPTH: usize = 6;

fn budget() -> SearchBudget {
    SearchBudget::default().with_depth(DEPTH)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn min_cost_matches_exhaustive_search(seed in any::<u64>()) {
        let m = common::model(seed);
        let found = find_plan(&m, Objective::MinCost, budget());
        match min_cost(&m, DEPTH) {
            Some(best) => {
                let plan = found.unwrap();
                prop_assert_eq!(plan.total_cost, best);
                prop_assert!(plan.len() <= DEPTH);
                let replay = m.execute(&plan.steps).unwrap();
                prop_assert!(m.satisfies_goal(&replay));
            }
            None => prop_assert_eq!(found, Err(PlanError::NoPlanFound)),
        }
    }

    #[test]
    fn enumeration_matches_simple_paths(seed in any::<u64>()) {
        let m = common::model(seed);
        let got: BTreeSet<Vec<String>> = enumerate_plans(&m, budget())
            .unwrap()
            .into_iter()
            .map(|p| p.steps)
            .collect();
        prop_assert_eq!(got, simple_path_plans(&m, DEPTH));
    }

    #[test]
    fn planning_is_deterministic(seed in any::<u64>(), utility in any::<bool>()) {
        let m = common::model(seed);
        let objective = if utility { Objective::MaxUtility } else { Objective::MinCost };
        prop_assert_eq!(find_plan(&m, objective, budget()), find_plan(&m, objective, budget()));
    }

    #[test]
    fn max_utility_plan_is_best_enumerated(seed in any::<u64>()) {
        let m = common::model(seed);
        if let Ok(plan) = find_plan(&m, Objective::MaxUtility, budget()) {
            let best = enumerate_plans(&m, budget())
                .unwrap()
                .iter()
                .map(|p| m.final_state_utility(p))
                .max()
                .unwrap();
            prop_assert_eq!(m.final_state_utility(&plan), best);
        }
    }
}

#[test]
fn tiny_expansion_budget_is_reported() {
    let m = ethiplan::fixtures::robot_and_frank();
    let b = SearchBudget::new(10, 1).unwrap();
    assert!(matches!(
        find_plan(&m, Objective::MinCost, b),
        Err(PlanError::BudgetExceeded { .. })
    ));
}
