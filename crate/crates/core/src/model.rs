//! Grounded STRIPS planning models annotated with moral information.
//!
//! A [`PlanningModel`] holds everything the rest of the crate reasons about:
//! the fact vocabulary, the actions with their intrinsic moral value, the
//! initial state, the goal and a utility map over facts. Models produced by
//! compiling a moderator suggestion carry a non-empty provenance list.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prefix reserved for facts introduced by model compilation.
pub const AUX_PREFIX: &str = "__aux_";

/// A grounded proposition, compared by name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fact(String);

impl Fact {
    pub fn new(name: impl Into<String>) -> Self {
        Fact(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_auxiliary(&self) -> bool {
        self.0.starts_with(AUX_PREFIX)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Fact {
    fn from(s: &str) -> Self {
        Fact::new(s)
    }
}

/// A state is the set of facts currently true.
pub type State = BTreeSet<Fact>;

/// Moral value an action carries independently of its consequences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntrinsicValue {
    Good,
    #[default]
    Neutral,
    Bad,
}

impl IntrinsicValue {
    pub fn keyword(self) -> &'static str {
        match self {
            IntrinsicValue::Good => "good",
            IntrinsicValue::Neutral => "neutral",
            IntrinsicValue::Bad => "bad",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        match kw {
            "good" => Some(IntrinsicValue::Good),
            "neutral" => Some(IntrinsicValue::Neutral),
            "bad" => Some(IntrinsicValue::Bad),
            _ => None,
        }
    }
}

impl fmt::Display for IntrinsicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    pub preconditions: BTreeSet<Fact>,
    pub add_effects: BTreeSet<Fact>,
    pub del_effects: BTreeSet<Fact>,
    pub cost: u32,
    pub intrinsic: IntrinsicValue,
}

impl Action {
    /// An action with no preconditions or effects, cost 1 and neutral value.
    pub fn new(name: impl Into<String>) -> Self {
        Action {
            name: name.into(),
            preconditions: BTreeSet::new(),
            add_effects: BTreeSet::new(),
            del_effects: BTreeSet::new(),
            cost: 1,
            intrinsic: IntrinsicValue::Neutral,
        }
    }

    pub fn with_pre<I: IntoIterator<Item = S>, S: Into<String>>(mut self, facts: I) -> Self {
        self.preconditions.extend(facts.into_iter().map(|f| Fact::new(f)));
        self
    }

    pub fn with_add<I: IntoIterator<Item = S>, S: Into<String>>(mut self, facts: I) -> Self {
        self.add_effects.extend(facts.into_iter().map(|f| Fact::new(f)));
        self
    }

    pub fn with_del<I: IntoIterator<Item = S>, S: Into<String>>(mut self, facts: I) -> Self {
        self.del_effects.extend(facts.into_iter().map(|f| Fact::new(f)));
        self
    }

    pub fn with_cost(mut self, cost: u32) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_intrinsic(mut self, value: IntrinsicValue) -> Self {
        self.intrinsic = value;
        self
    }

    /// Collapses delete-then-add conflicts: a fact in both effect sets ends
    /// up true, so it is dropped from the delete list.
    pub fn normalize(&mut self) {
        let add = &self.add_effects;
        self.del_effects.retain(|f| !add.contains(f));
    }

    pub fn is_applicable(&self, state: &State) -> bool {
        self.preconditions.is_subset(state)
    }

    /// Facts mentioned anywhere in the action.
    pub fn mentioned_facts(&self) -> impl Iterator<Item = &Fact> {
        self.preconditions
            .iter()
            .chain(self.add_effects.iter())
            .chain(self.del_effects.iter())
    }
}

/// Signed utility per fact. Facts absent from the map have utility 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilityFunction {
    entries: BTreeMap<Fact, i64>,
}

impl UtilityFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, fact: Fact, utility: i64) {
        self.entries.insert(fact, utility);
    }

    pub fn get(&self, fact: &Fact) -> i64 {
        self.entries.get(fact).copied().unwrap_or(0)
    }

    pub fn is_harm(&self, fact: &Fact) -> bool {
        self.get(fact) < 0
    }

    pub fn is_benefit(&self, fact: &Fact) -> bool {
        self.get(fact) > 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Fact, i64)> {
        self.entries.iter().map(|(f, u)| (f, *u))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn state_utility(&self, state: &State) -> i64 {
        state.iter().map(|f| self.get(f)).sum()
    }
}

impl<S: Into<String>> FromIterator<(S, i64)> for UtilityFunction {
    fn from_iter<T: IntoIterator<Item = (S, i64)>>(iter: T) -> Self {
        UtilityFunction {
            entries: iter.into_iter().map(|(f, u)| (Fact::new(f), u)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown action `{name}` at step {step}")]
    UnknownActionAtStep { step: usize, name: String },
    #[error("precondition violation: `{action}` is missing {}", fmt_facts(.missing))]
    PreconditionViolation { action: String, missing: Vec<Fact> },
    #[error("precondition violation at step {step}: `{action}` is missing {}", fmt_facts(.missing))]
    StepPreconditionViolation {
        step: usize,
        action: String,
        missing: Vec<Fact>,
    },
    #[error("invalid model: {0}")]
    Invalid(String),
}

fn fmt_facts(facts: &[Fact]) -> String {
    let names: Vec<&str> = facts.iter().map(Fact::name).collect();
    format!("{{{}}}", names.join(", "))
}

impl ModelError {
    /// Step index the error refers to, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            ModelError::UnknownActionAtStep { step, .. }
            | ModelError::StepPreconditionViolation { step, .. } => Some(*step),
            _ => None,
        }
    }
}

/// Applies `action` to `state`: `(state \ del) ∪ add`.
pub fn apply_action(state: &State, action: &Action) -> Result<State, ModelError> {
    if !action.is_applicable(state) {
        let missing = action.preconditions.difference(state).cloned().collect();
        return Err(ModelError::PreconditionViolation {
            action: action.name.clone(),
            missing,
        });
    }
    Ok(successor(state, action))
}

/// Successor without the precondition check.
pub(crate) fn successor(state: &State, action: &Action) -> State {
    let mut next: State = state.difference(&action.del_effects).cloned().collect();
    next.extend(action.add_effects.iter().cloned());
    next
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningModel {
    pub domain_name: String,
    pub problem_name: String,
    pub facts: BTreeSet<Fact>,
    /// Actions keyed by name.
    pub actions: BTreeMap<String, Action>,
    pub init: State,
    pub goal: BTreeSet<Fact>,
    pub utility: UtilityFunction,
    /// Display phrases for action (or fact) names, used by explanations.
    pub display: BTreeMap<String, String>,
    /// Ids of the suggestions compiled into this model, oldest first.
    pub provenance: Vec<String>,
}

impl PlanningModel {
    pub fn action(&self, name: &str) -> Option<&Action> {
        self.actions.get(name)
    }

    /// Whether this model is a hypothetical model produced by compilation.
    pub fn is_hmodel(&self) -> bool {
        !self.provenance.is_empty()
    }

    /// Inserts an action after normalizing its effects. Returns the previous
    /// action with the same name, if one existed.
    pub fn insert_action(&mut self, mut action: Action) -> Option<Action> {
        action.normalize();
        self.actions.insert(action.name.clone(), action)
    }

    pub fn display_phrase(&self, name: &str) -> Option<&str> {
        self.display.get(name).map(String::as_str)
    }

    /// Checks the structural invariants: init, goal, utility keys and every
    /// fact mentioned by an action are declared; effects are normalized.
    pub fn validate(&self) -> Result<(), ModelError> {
        let undeclared = |what: &str, f: &Fact| {
            ModelError::Invalid(format!("{what} mentions undeclared fact `{f}`"))
        };
        if let Some(f) = self.init.iter().find(|f| !self.facts.contains(*f)) {
            return Err(undeclared("init", f));
        }
        if let Some(f) = self.goal.iter().find(|f| !self.facts.contains(*f)) {
            return Err(undeclared("goal", f));
        }
        if let Some((f, _)) = self.utility.iter().find(|(f, _)| !self.facts.contains(*f)) {
            return Err(undeclared("utility", f));
        }
        for (name, action) in &self.actions {
            if name != &action.name {
                return Err(ModelError::Invalid(format!(
                    "action stored under `{name}` is named `{}`",
                    action.name
                )));
            }
            if let Some(f) = action.mentioned_facts().find(|f| !self.facts.contains(*f)) {
                return Err(undeclared(&format!("action `{name}`"), f));
            }
            if !action.add_effects.is_disjoint(&action.del_effects) {
                return Err(ModelError::Invalid(format!(
                    "action `{name}` adds and deletes the same fact"
                )));
            }
        }
        Ok(())
    }

    /// Executes `steps` from the initial state, recording the full trace.
    /// Goal satisfaction is not required; see [`PlanningModel::satisfies_goal`].
    pub fn execute<S: AsRef<str>>(&self, steps: &[S]) -> Result<Plan, ModelError> {
        let mut trace = Vec::with_capacity(steps.len() + 1);
        trace.push(self.init.clone());
        let mut total_cost = 0u64;
        for (i, name) in steps.iter().enumerate() {
            let name = name.as_ref();
            let action = self
                .action(name)
                .ok_or_else(|| ModelError::UnknownActionAtStep {
                    step: i,
                    name: name.to_string(),
                })?;
            let next = match apply_action(&trace[i], action) {
                Ok(next) => next,
                Err(ModelError::PreconditionViolation { action, missing }) => {
                    return Err(ModelError::StepPreconditionViolation {
                        step: i,
                        action,
                        missing,
                    })
                }
                Err(e) => return Err(e),
            };
            total_cost += u64::from(action.cost);
            trace.push(next);
        }
        Ok(Plan {
            steps: steps.iter().map(|s| s.as_ref().to_string()).collect(),
            trace,
            total_cost,
        })
    }

    pub fn satisfies_goal(&self, plan: &Plan) -> bool {
        self.goal.is_subset(plan.final_state())
    }

    /// Sum of fact utilities over the plan's final state.
    pub fn final_state_utility(&self, plan: &Plan) -> i64 {
        self.utility.state_utility(plan.final_state())
    }
}

/// An executed action sequence together with its state trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<String>,
    /// `trace[0]` is the initial state; `trace[i + 1]` follows `steps[i]`.
    pub trace: Vec<State>,
    pub total_cost: u64,
}

impl Plan {
    pub fn final_state(&self) -> &State {
        self.trace.last().expect("trace always holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            write!(f, "(empty plan) (cost {})", self.total_cost)
        } else {
            write!(f, "{} (cost {})", self.steps.join("; "), self.total_cost)
        }
    }
}
