//! Optimal forward state-space search and bounded plan enumeration.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{successor, Action, Plan, PlanningModel, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_depth: usize,
    pub max_expansions: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_depth: 20,
            max_expansions: 1_000_000,
        }
    }
}

impl SearchBudget {
    pub fn new(max_depth: usize, max_expansions: usize) -> Result<Self, PlanError> {
        if max_depth == 0 || max_expansions == 0 {
            return Err(PlanError::InvalidBudget);
        }
        Ok(SearchBudget {
            max_depth,
            max_expansions,
        })
    }

    pub fn with_depth(self, max_depth: usize) -> Self {
        SearchBudget { max_depth, ..self }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    MinCost,
    MaxUtility,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no plan found")]
    NoPlanFound,
    #[error("search budget exceeded after {expansions} expansions")]
    BudgetExceeded { expansions: usize },
    #[error("search budget limits must be positive")]
    InvalidBudget,
}

/// The planning system the workbench wraps. The built-in [`Planner`] is one
/// implementation; others may call out to external tools.
pub trait PlanSource {
    fn find_plan(&self, model: &PlanningModel) -> Result<Plan, PlanError>;
}

/// Built-in planner configured with an objective and a budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Planner {
    pub objective: Objective,
    pub budget: SearchBudget,
}

impl PlanSource for Planner {
    fn find_plan(&self, model: &PlanningModel) -> Result<Plan, PlanError> {
        find_plan(model, self.objective, self.budget)
    }
}

pub fn find_plan(model: &PlanningModel, objective: Objective, budget: SearchBudget) -> Result<Plan, PlanError> {
    match objective {
        Objective::MinCost => uniform_cost(model, budget),
        Objective::MaxUtility => {
            let plans = enumerate_plans(model, budget)?;
            plans
                .into_iter()
                .max_by(|a, b| {
                    model
                        .final_state_utility(a)
                        .cmp(&model.final_state_utility(b))
                        .then_with(|| b.total_cost.cmp(&a.total_cost))
                        .then_with(|| b.steps.cmp(&a.steps))
                })
                .ok_or(PlanError::NoPlanFound)
        }
    }
}

/// Search node; ordered so that the heap pops lowest cost first, then the
/// lexicographically smallest step sequence.
#[derive(PartialEq, Eq)]
struct Node {
    cost: u64,
    steps: Vec<usize>,
    state: State,
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.cost, &self.steps).cmp(&(other.cost, &other.steps))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Uniform-cost search bounded by `max_depth`. A state popped again is
/// skipped unless it is now reached in fewer steps than before: a cheaper
/// but deeper path may not leave room to reach the goal within the bound.
fn uniform_cost(model: &PlanningModel, budget: SearchBudget) -> Result<Plan, PlanError> {
    // Actions are kept in name order, so step indices compare like names.
    let actions: Vec<&Action> = model.actions.values().collect();
    let mut best_depth: HashMap<State, usize> = HashMap::new();
    let mut open = BinaryHeap::new();
    open.push(Reverse(Node {
        cost: 0,
        steps: Vec::new(),
        state: model.init.clone(),
    }));
    let mut expansions = 0usize;
    while let Some(Reverse(node)) = open.pop() {
        let depth = node.steps.len();
        match best_depth.get(&node.state) {
            Some(&d) if d <= depth => continue,
            _ => {}
        }
        if model.goal.is_subset(&node.state) {
            let names: Vec<&str> = node.steps.iter().map(|&i| actions[i].name.as_str()).collect();
            return Ok(model
                .execute(&names)
                .expect("search only applies applicable actions"));
        }
        expansions += 1;
        if expansions > budget.max_expansions {
            return Err(PlanError::BudgetExceeded {
                expansions: budget.max_expansions,
            });
        }
        best_depth.insert(node.state.clone(), depth);
        if depth >= budget.max_depth {
            continue;
        }
        for (i, action) in actions.iter().enumerate() {
            if !action.is_applicable(&node.state) {
                continue;
            }
            let next = successor(&node.state, action);
            if matches!(best_depth.get(&next), Some(&d) if d <= depth + 1) {
                continue;
            }
            let mut steps = node.steps.clone();
            steps.push(i);
            open.push(Reverse(Node {
                cost: node.cost + u64::from(action.cost),
                steps,
                state: next,
            }));
        }
    }
    Err(PlanError::NoPlanFound)
}

/// Every goal-satisfying plan of at most `max_depth` steps whose trace
/// never revisits a state, sorted by cost and then by step names.
///
/// Plans are not cut off at the first goal state: a simple path that passes
/// through the goal and ends in another goal state is a distinct plan.
pub fn enumerate_plans(model: &PlanningModel, budget: SearchBudget) -> Result<Vec<Plan>, PlanError> {
    struct Dfs<'a> {
        model: &'a PlanningModel,
        actions: Vec<&'a Action>,
        budget: SearchBudget,
        expansions: usize,
        on_path: HashSet<State>,
        steps: Vec<usize>,
        found: Vec<Vec<usize>>,
    }

    impl Dfs<'_> {
        fn visit(&mut self, state: &State) -> Result<(), PlanError> {
            self.expansions += 1;
            if self.expansions > self.budget.max_expansions {
                return Err(PlanError::BudgetExceeded {
                    expansions: self.budget.max_expansions,
                });
            }
            if self.model.goal.is_subset(state) {
                self.found.push(self.steps.clone());
            }
            if self.steps.len() >= self.budget.max_depth {
                return Ok(());
            }
            for i in 0..self.actions.len() {
                let action = self.actions[i];
                if !action.is_applicable(state) {
                    continue;
                }
                let next = successor(state, action);
                if self.on_path.contains(&next) {
                    continue;
                }
                self.on_path.insert(next.clone());
                self.steps.push(i);
                let r = self.visit(&next);
                self.steps.pop();
                self.on_path.remove(&next);
                r?;
            }
            Ok(())
        }
    }

    let mut dfs = Dfs {
        model,
        actions: model.actions.values().collect(),
        budget,
        expansions: 0,
        on_path: HashSet::from([model.init.clone()]),
        steps: Vec::new(),
        found: Vec::new(),
    };
    dfs.visit(&model.init)?;

    let mut plans: Vec<Plan> = dfs
        .found
        .iter()
        .map(|idx| {
            let names: Vec<&str> = idx.iter().map(|&i| dfs.actions[i].name.as_str()).collect();
            model.execute(&names).expect("enumeration only applies applicable actions")
        })
        .collect();
    plans.sort_by(|a, b| (a.total_cost, &a.steps).cmp(&(b.total_cost, &b.steps)));
    Ok(plans)
}
