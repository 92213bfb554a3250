//! Compiling moderator suggestions into hypothetical models.
//!
//! | suggestion            | transformation                                          |
//! |-----------------------|---------------------------------------------------------|
//! | `forbid a`            | remove `a`                                              |
//! | `force a`             | `a` adds `__aux_forced_a`, which joins the goal         |
//! | `replace a with b`    | forbid `a`, then force `b`                              |
//! | `order a before b`    | `a` adds `__aux_done_a`, which `b` requires             |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{Fact, ModelError, PlanningModel, AUX_PREFIX};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Suggestion {
    Forbid(String),
    Force(String),
    Replace { forbidden: String, forced: String },
    Order { earlier: String, later: String },
}

impl Suggestion {
    /// Stable text form, also used as the provenance entry.
    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn actions(&self) -> Vec<&str> {
        match self {
            Suggestion::Forbid(a) | Suggestion::Force(a) => vec![a],
            Suggestion::Replace { forbidden, forced } => vec![forbidden, forced],
            Suggestion::Order { earlier, later } => vec![earlier, later],
        }
    }

    fn forbids(&self) -> Option<&str> {
        match self {
            Suggestion::Forbid(a) | Suggestion::Replace { forbidden: a, .. } => Some(a),
            _ => None,
        }
    }

    fn forces(&self) -> Option<&str> {
        match self {
            Suggestion::Force(a) | Suggestion::Replace { forced: a, .. } => Some(a),
            _ => None,
        }
    }

    /// Whether a step sequence honors the suggestion.
    pub fn is_satisfied_by<S: AsRef<str>>(&self, steps: &[S]) -> bool {
        let has = |a: &str| steps.iter().any(|s| s.as_ref() == a);
        match self {
            Suggestion::Forbid(a) => !has(a),
            Suggestion::Force(a) => has(a),
            Suggestion::Replace { forbidden, forced } => !has(forbidden) && has(forced),
            Suggestion::Order { earlier, later } => {
                let mut seen_earlier = false;
                for s in steps {
                    let s = s.as_ref();
                    if s == later && !seen_earlier {
                        return false;
                    }
                    // Checked after `later` so `order a before a` needs a prior `a`.
                    if s == earlier {
                        seen_earlier = true;
                    }
                }
                true
            }
        }
    }
}

impl fmt::Display for Suggestion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Suggestion::Forbid(a) => write!(f, "forbid {a}"),
            Suggestion::Force(a) => write!(f, "force {a}"),
            Suggestion::Replace { forbidden, forced } => write!(f, "replace {forbidden} with {forced}"),
            Suggestion::Order { earlier, later } => write!(f, "order {earlier} before {later}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad suggestion `{input}`: expected `forbid NAME`, `force NAME`, `replace NAME with NAME` or `order NAME before NAME`")]
pub struct SuggestionSyntaxError {
    pub input: String,
}

impl FromStr for Suggestion {
    type Err = SuggestionSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let name = |w: &str| crate::parser::is_identifier(w).then(|| w.to_string());
        let parsed = match words.as_slice() {
            ["forbid", a] => name(a).map(Suggestion::Forbid),
            ["force", a] => name(a).map(Suggestion::Force),
            ["replace", a, "with", b] => name(a).zip(name(b)).map(|(forbidden, forced)| Suggestion::Replace {
                forbidden,
                forced,
            }),
            ["order", a, "before", b] => name(a).zip(name(b)).map(|(earlier, later)| Suggestion::Order {
                earlier,
                later,
            }),
            _ => None,
        };
        parsed.ok_or_else(|| SuggestionSyntaxError { input: s.to_string() })
    }
}

impl Serialize for Suggestion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Suggestion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`{suggestion}` conflicts with earlier suggestion `{earlier}`")]
    ConflictingSuggestion { suggestion: String, earlier: String },
    #[error("`{0}` must name two different actions")]
    IdenticalActions(String),
    #[error("suggestion {index} (`{suggestion}`) failed: {source}")]
    InChain {
        index: usize,
        suggestion: String,
        #[source]
        source: Box<CompileError>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HModelResult {
    pub hmodel: PlanningModel,
    /// Auxiliary facts the compilation added to the fact set.
    pub introduced_facts: BTreeSet<Fact>,
}

fn forced_fact(action: &str) -> Fact {
    Fact::new(format!("{AUX_PREFIX}forced_{action}"))
}

fn done_fact(action: &str) -> Fact {
    Fact::new(format!("{AUX_PREFIX}done_{action}"))
}

/// Rejects a suggestion that forbids an action an earlier one forced, or the
/// other way round.
fn check_conflicts(model: &PlanningModel, suggestion: &Suggestion) -> Result<(), CompileError> {
    for id in &model.provenance {
        let Ok(earlier) = id.parse::<Suggestion>() else { continue };
        let clash = matches!((suggestion.forces(), earlier.forbids()), (Some(a), Some(b)) if a == b)
            || matches!((suggestion.forbids(), earlier.forces()), (Some(a), Some(b)) if a == b);
        if clash {
            return Err(CompileError::ConflictingSuggestion {
                suggestion: suggestion.id(),
                earlier: id.clone(),
            });
        }
    }
    Ok(())
}

fn forbid(model: &mut PlanningModel, action: &str) {
    model.actions.remove(action);
}

fn force(model: &mut PlanningModel, introduced: &mut BTreeSet<Fact>, action: &str) {
    let fact = forced_fact(action);
    if model.facts.insert(fact.clone()) {
        introduced.insert(fact.clone());
    }
    let a = model.actions.get_mut(action).expect("checked by caller");
    a.add_effects.insert(fact.clone());
    a.del_effects.remove(&fact);
    model.goal.insert(fact);
}

fn order(model: &mut PlanningModel, introduced: &mut BTreeSet<Fact>, earlier: &str, later: &str) {
    let fact = done_fact(earlier);
    if model.facts.insert(fact.clone()) {
        introduced.insert(fact.clone());
    }
    let a = model.actions.get_mut(earlier).expect("checked by caller");
    a.add_effects.insert(fact.clone());
    a.del_effects.remove(&fact);
    model
        .actions
        .get_mut(later)
        .expect("checked by caller")
        .preconditions
        .insert(fact);
}

/// Compiles one suggestion into `model`, returning the hypothetical model.
/// The input is left untouched.
pub fn compile(model: &PlanningModel, suggestion: &Suggestion) -> Result<HModelResult, CompileError> {
    check_conflicts(model, suggestion)?;
    if let Suggestion::Replace { forbidden, forced } = suggestion {
        if forbidden == forced {
            return Err(CompileError::IdenticalActions(suggestion.id()));
        }
    }
    if let Some(missing) = suggestion.actions().into_iter().find(|a| model.action(a).is_none()) {
        return Err(CompileError::UnknownAction(missing.to_string()));
    }

    let mut hmodel = model.clone();
    let mut introduced = BTreeSet::new();
    match suggestion {
        Suggestion::Forbid(a) => forbid(&mut hmodel, a),
        Suggestion::Force(a) => force(&mut hmodel, &mut introduced, a),
        Suggestion::Replace { forbidden, forced } => {
            forbid(&mut hmodel, forbidden);
            force(&mut hmodel, &mut introduced, forced);
        }
        Suggestion::Order { earlier, later } => order(&mut hmodel, &mut introduced, earlier, later),
    }
    hmodel.provenance.push(suggestion.id());
    debug_assert!(hmodel.validate().is_ok());
    Ok(HModelResult {
        hmodel,
        introduced_facts: introduced,
    })
}

/// Left fold of [`compile`] over `suggestions`.
pub fn compile_chain(model: &PlanningModel, suggestions: &[Suggestion]) -> Result<HModelResult, CompileError> {
    let mut acc = HModelResult {
        hmodel: model.clone(),
        introduced_facts: BTreeSet::new(),
    };
    for (index, s) in suggestions.iter().enumerate() {
        let step = compile(&acc.hmodel, s).map_err(|e| CompileError::InChain {
            index,
            suggestion: s.id(),
            source: Box::new(e),
        })?;
        acc.hmodel = step.hmodel;
        acc.introduced_facts.extend(step.introduced_facts);
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("plan is not applicable in the original model: {reason}")]
pub struct ValidationFailed {
    pub step: Option<usize>,
    pub reason: String,
}

/// Re-executes hypothetical-plan steps on the original model, which has no
/// auxiliary facts. Returns the steps unchanged when they are applicable.
pub fn strip_auxiliaries<S: AsRef<str>>(original: &PlanningModel, steps: &[S]) -> Result<Vec<String>, ValidationFailed> {
    match original.execute(steps) {
        Ok(plan) => Ok(plan.steps),
        Err(e) => Err(ValidationFailed {
            step: e.step(),
            reason: e.to_string(),
        }),
    }
}

impl From<ModelError> for ValidationFailed {
    fn from(e: ModelError) -> Self {
        ValidationFailed {
            step: e.step(),
            reason: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::planner::{find_plan, Objective, SearchBudget};

    fn s(text: &str) -> Suggestion {
        text.parse().unwrap()
    }

    fn solve(m: &PlanningModel) -> Vec<String> {
        find_plan(m, Objective::MinCost, SearchBudget::default()).unwrap().steps
    }

    #[test]
    fn suggestion_grammar() {
        assert_eq!(s("forbid lie_frank"), Suggestion::Forbid("lie_frank".into()));
        assert_eq!(
            s("replace lie_frank with beg_frank"),
            Suggestion::Replace {
                forbidden: "lie_frank".into(),
                forced: "beg_frank".into()
            }
        );
        assert_eq!(s("  order  a before b ").id(), "order a before b");
        for bad in ["", "forbid", "forbid a b", "replace a by b", "force (a)", "order a after b"] {
            assert!(bad.parse::<Suggestion>().is_err(), "{bad}");
        }
    }

    #[test]
    fn forbid_removes_the_action() {
        let r = compile(&fixtures::robot_and_frank(), &s("forbid lie_frank")).unwrap();
        assert_eq!(r.hmodel.actions.len(), 2);
        assert_eq!(r.hmodel.provenance, ["forbid lie_frank"]);
        assert!(r.introduced_facts.is_empty());
        assert_eq!(solve(&r.hmodel), ["beg_frank", "exercise"]);
    }

    #[test]
    fn force_extends_the_goal() {
        let r = compile(&fixtures::robot_and_frank(), &s("force beg_frank")).unwrap();
        let goal: Vec<&str> = r.hmodel.goal.iter().map(Fact::name).collect();
        assert_eq!(goal, ["__aux_forced_beg_frank", "healthy"]);
        assert_eq!(r.introduced_facts, [Fact::from("__aux_forced_beg_frank")].into());
        assert!(r.hmodel.actions["beg_frank"]
            .add_effects
            .contains(&Fact::from("__aux_forced_beg_frank")));
    }

    #[test]
    fn order_adds_a_precondition() {
        let r = compile(&fixtures::robot_and_frank(), &s("order beg_frank before exercise")).unwrap();
        let pre = &r.hmodel.actions["exercise"].preconditions;
        assert!(pre.contains(&Fact::from("motivated")));
        assert!(pre.contains(&Fact::from("__aux_done_beg_frank")));
        assert_eq!(solve(&r.hmodel), ["beg_frank", "exercise"]);
    }

    #[test]
    fn replace_then_force_the_replaced_action_conflicts() {
        let r = compile(&fixtures::robot_and_frank(), &s("replace lie_frank with beg_frank")).unwrap();
        assert_eq!(solve(&r.hmodel), ["beg_frank", "exercise"]);
        assert_eq!(
            compile(&r.hmodel, &s("force lie_frank")),
            Err(CompileError::ConflictingSuggestion {
                suggestion: "force lie_frank".into(),
                earlier: "replace lie_frank with beg_frank".into(),
            })
        );
        assert!(matches!(
            compile(&r.hmodel, &s("forbid beg_frank")),
            Err(CompileError::ConflictingSuggestion { .. })
        ));
    }

    #[test]
    fn unknown_and_identical_actions() {
        let m = fixtures::robot_and_frank();
        assert_eq!(compile(&m, &s("forbid fly")), Err(CompileError::UnknownAction("fly".into())));
        assert!(matches!(
            compile(&m, &s("replace beg_frank with beg_frank")),
            Err(CompileError::IdenticalActions(_))
        ));
    }

    #[test]
    fn chain_folds_left() {
        let m = fixtures::robot_and_frank();
        let one = compile_chain(&m, &[s("forbid lie_frank")]).unwrap();
        assert_eq!(one, compile(&m, &s("forbid lie_frank")).unwrap());

        let two = compile_chain(&m, &[s("forbid lie_frank"), s("order beg_frank before exercise")]).unwrap();
        assert_eq!(two.hmodel.provenance, ["forbid lie_frank", "order beg_frank before exercise"]);
        assert_eq!(solve(&two.hmodel), ["beg_frank", "exercise"]);

        let none = compile_chain(&m, &[]).unwrap();
        assert_eq!(none.hmodel, m);
        assert!(none.introduced_facts.is_empty());
    }

    #[test]
    fn chain_reports_failing_index() {
        let m = fixtures::robot_and_frank();
        let err = compile_chain(&m, &[s("forbid lie_frank"), s("forbid lie_frank")]).unwrap_err();
        assert!(matches!(err, CompileError::InChain { index: 1, .. }), "{err}");
    }

    #[test]
    fn hplan_validation_against_original() {
        let m = fixtures::robot_and_frank();
        assert_eq!(
            strip_auxiliaries(&m, &["beg_frank", "exercise"]).unwrap(),
            ["beg_frank", "exercise"]
        );
        assert!(strip_auxiliaries::<&str>(&m, &[]).unwrap().is_empty());
        let err = strip_auxiliaries(&m, &["beg_frank", "teleport"]).unwrap_err();
        assert_eq!(err.step, Some(1));
    }

    #[test]
    fn suggestion_satisfaction() {
        assert!(s("forbid lie_frank").is_satisfied_by(&["beg_frank", "exercise"]));
        assert!(!s("force beg_frank").is_satisfied_by(&["lie_frank", "exercise"]));
        assert!(!s("order beg_frank before exercise").is_satisfied_by(&["exercise"]));
        assert!(s("order beg_frank before exercise").is_satisfied_by(&["beg_frank", "exercise", "exercise"]));
        assert!(!s("order a before a").is_satisfied_by(&["a"]));
        assert!(s("replace a with b").is_satisfied_by(&["b"]));
        assert!(!s("replace a with b").is_satisfied_by(&["a", "b"]));
    }

    #[test]
    fn compile_leaves_input_untouched() {
        let m = fixtures::robot_and_frank();
        let before = m.clone();
        for text in ["forbid lie_frank", "force beg_frank", "replace lie_frank with beg_frank", "order beg_frank before exercise"] {
            let r = compile(&m, &s(text)).unwrap();
            assert_eq!(r.hmodel.provenance.len(), m.provenance.len() + 1);
        }
        assert_eq!(m, before);
    }
}
