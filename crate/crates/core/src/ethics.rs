//! Moral permissibility of plans under a selectable principle.
//!
//! Every principle is expressed as a propositional formula over
//! [`ReasonAtom`]s together with the truth assignment the plan induces.
//! Checking permissibility is then just evaluating the formula, and the
//! formula doubles as the input for reason extraction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::logic::Formula;
use crate::model::{Fact, ModelError, Plan, PlanningModel};
use crate::planner::{enumerate_plans, PlanError, SearchBudget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrincipleId {
    Deontology,
    ActUtilitarian,
    DoNoHarm,
    DoNoInstrumentalHarm,
    DoubleEffect,
}

impl PrincipleId {
    pub const ALL: [PrincipleId; 5] = [
        PrincipleId::Deontology,
        PrincipleId::ActUtilitarian,
        PrincipleId::DoNoHarm,
        PrincipleId::DoNoInstrumentalHarm,
        PrincipleId::DoubleEffect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrincipleId::Deontology => "deontology",
            PrincipleId::ActUtilitarian => "act-utilitarian",
            PrincipleId::DoNoHarm => "do-no-harm",
            PrincipleId::DoNoInstrumentalHarm => "do-no-instrumental-harm",
            PrincipleId::DoubleEffect => "double-effect",
        }
    }
}

impl fmt::Display for PrincipleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown principle `{0}` (expected one of deontology, act-utilitarian, do-no-harm, do-no-instrumental-harm, double-effect)")]
pub struct UnknownPrinciple(pub String);

impl FromStr for PrincipleId {
    type Err = UnknownPrinciple;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        PrincipleId::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| UnknownPrinciple(s.to_string()))
    }
}

/// Grounded proposition a principle formula talks about.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReasonAtom {
    /// The action is intrinsically bad.
    Bad(String),
    /// A step of the action made the harmful fact true.
    CausesHarm(String, Fact),
    /// The fact is used as a means: it is a causal-link fact of the plan.
    Means(Fact),
    /// The harmful fact is part of the goal.
    GoalHarm(Fact),
    /// Some alternative plan reaches a strictly higher utility.
    Dominated,
    /// The final-state utility is positive.
    Proportional,
}

impl ReasonAtom {
    /// Action names the atom refers to.
    pub fn actions(&self) -> impl Iterator<Item = &str> {
        match self {
            ReasonAtom::Bad(a) | ReasonAtom::CausesHarm(a, _) => Some(a.as_str()),
            _ => None,
        }
        .into_iter()
    }
}

impl fmt::Display for ReasonAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReasonAtom::Bad(a) => write!(f, "Bad({a})"),
            ReasonAtom::CausesHarm(a, fact) => write!(f, "CausesHarm({a}, {fact})"),
            ReasonAtom::Means(fact) => write!(f, "Means({fact})"),
            ReasonAtom::GoalHarm(fact) => write!(f, "GoalHarm({fact})"),
            ReasonAtom::Dominated => f.write_str("Dominated"),
            ReasonAtom::Proportional => f.write_str("Proportional"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed reason atom `{0}`")]
pub struct MalformedAtom(pub String);

impl FromStr for ReasonAtom {
    type Err = MalformedAtom;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MalformedAtom(s.to_string());
        match s {
            "Dominated" => return Ok(ReasonAtom::Dominated),
            "Proportional" => return Ok(ReasonAtom::Proportional),
            _ => {}
        }
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<&str> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(str::trim)
            .collect();
        if args.iter().any(|a| a.is_empty()) {
            return Err(bad());
        }
        match (head, args.as_slice()) {
            ("Bad", [a]) => Ok(ReasonAtom::Bad(a.to_string())),
            ("CausesHarm", [a, f]) => Ok(ReasonAtom::CausesHarm(a.to_string(), Fact::from(*f))),
            ("Means", [f]) => Ok(ReasonAtom::Means(Fact::from(*f))),
            ("GoalHarm", [f]) => Ok(ReasonAtom::GoalHarm(Fact::from(*f))),
            _ => Err(bad()),
        }
    }
}

impl Serialize for ReasonAtom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReasonAtom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub type Assignment = BTreeMap<ReasonAtom, bool>;

/// A principle's formula together with the truth values the plan induces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleFormula {
    pub formula: Formula<ReasonAtom>,
    pub assignment: Assignment,
}

impl PrincipleFormula {
    pub fn holds(&self) -> bool {
        self.formula.eval(&self.assignment)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub permissible: bool,
    pub principle: PrincipleId,
    pub formula: PrincipleFormula,
    /// Caveat on how the verdict was obtained, e.g. the search bound.
    pub bound_note: Option<String>,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        if self.permissible {
            "permissible"
        } else {
            "impermissible"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Consumer {
    Step(usize),
    Goal,
}

impl fmt::Display for Consumer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Consumer::Step(i) => write!(f, "{i}"),
            Consumer::Goal => f.write_str("Goal"),
        }
    }
}

/// Step `producer` achieves `fact`, which `consumer` needs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CausalLink {
    pub producer: usize,
    pub fact: Fact,
    pub consumer: Consumer,
}

impl fmt::Display for CausalLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.producer, self.fact, self.consumer)
    }
}

/// Links every step precondition and goal fact to the latest earlier step
/// adding it. Facts only supplied by the initial state get no link.
pub fn causal_links(model: &PlanningModel, plan: &Plan) -> Vec<CausalLink> {
    let adds = |i: usize, f: &Fact| {
        model
            .action(&plan.steps[i])
            .is_some_and(|a| a.add_effects.contains(f))
    };
    let latest_producer = |before: usize, f: &Fact| (0..before).rev().find(|&i| adds(i, f));

    let mut links = Vec::new();
    for (j, name) in plan.steps.iter().enumerate() {
        let Some(action) = model.action(name) else { continue };
        for f in &action.preconditions {
            if let Some(i) = latest_producer(j, f) {
                links.push(CausalLink {
                    producer: i,
                    fact: f.clone(),
                    consumer: Consumer::Step(j),
                });
            }
        }
    }
    for f in &model.goal {
        if let Some(i) = latest_producer(plan.steps.len(), f) {
            links.push(CausalLink {
                producer: i,
                fact: f.clone(),
                consumer: Consumer::Goal,
            });
        }
    }
    links
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EthicsError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Search(#[from] PlanError),
}

impl From<ModelError> for EthicsError {
    fn from(e: ModelError) -> Self {
        EthicsError::InvalidPlan(e.to_string())
    }
}

/// Re-executes `plan` on `model` and checks that it reaches the goal.
fn checked_plan(model: &PlanningModel, plan: &Plan) -> Result<Plan, EthicsError> {
    let executed = model.execute(&plan.steps)?;
    if !model.satisfies_goal(&executed) {
        return Err(EthicsError::InvalidPlan("plan does not achieve the goal".into()));
    }
    Ok(executed)
}

/// (action, harmful fact) pairs where the action adds a negative-utility fact
/// somewhere in the plan, with whether it actually flipped the fact to true.
fn harm_candidates(model: &PlanningModel, plan: &Plan) -> BTreeMap<(String, Fact), bool> {
    let mut out = BTreeMap::new();
    for (i, name) in plan.steps.iter().enumerate() {
        let action = &model.actions[name];
        for f in action.add_effects.iter().filter(|f| model.utility.is_harm(f)) {
            let caused = !plan.trace[i].contains(f);
            *out.entry((name.clone(), f.clone())).or_insert(false) |= caused;
        }
    }
    out
}

/// Distinct step names in order of first occurrence.
fn distinct_steps(plan: &Plan) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    plan.steps
        .iter()
        .map(String::as_str)
        .filter(|s| seen.insert(*s))
        .collect()
}

struct Builder {
    conjuncts: Vec<Formula<ReasonAtom>>,
    assignment: Assignment,
}

impl Builder {
    fn new() -> Self {
        Builder {
            conjuncts: Vec::new(),
            assignment: Assignment::new(),
        }
    }

    fn set(&mut self, atom: ReasonAtom, value: bool) -> ReasonAtom {
        self.assignment.insert(atom.clone(), value);
        atom
    }

    fn no_bad_actions(&mut self, model: &PlanningModel, plan: &Plan) {
        for name in distinct_steps(plan) {
            let bad = model.actions[name].intrinsic == crate::model::IntrinsicValue::Bad;
            let atom = self.set(ReasonAtom::Bad(name.to_string()), bad);
            self.conjuncts.push(Formula::not_atom(atom));
        }
    }

    fn no_caused_harm(&mut self, model: &PlanningModel, plan: &Plan) {
        for ((action, fact), caused) in harm_candidates(model, plan) {
            let atom = self.set(ReasonAtom::CausesHarm(action, fact), caused);
            self.conjuncts.push(Formula::not_atom(atom));
        }
    }

    fn no_harm_as_means(&mut self, model: &PlanningModel, plan: &Plan) {
        let link_facts: BTreeSet<Fact> = causal_links(model, plan).into_iter().map(|l| l.fact).collect();
        for ((action, fact), caused) in harm_candidates(model, plan) {
            let means = self.set(ReasonAtom::Means(fact.clone()), link_facts.contains(&fact));
            let harm = self.set(ReasonAtom::CausesHarm(action, fact), caused);
            self.conjuncts
                .push(Formula::Or(vec![Formula::not_atom(harm), Formula::not_atom(means)]));
        }
    }

    fn no_harmful_goal(&mut self, model: &PlanningModel) {
        let harms: Vec<Fact> = model
            .utility
            .iter()
            .filter(|(_, u)| *u < 0)
            .map(|(f, _)| f.clone())
            .collect();
        for fact in harms {
            let in_goal = model.goal.contains(&fact);
            let atom = self.set(ReasonAtom::GoalHarm(fact), in_goal);
            self.conjuncts.push(Formula::not_atom(atom));
        }
    }

    fn finish(self, principle: PrincipleId, bound_note: Option<String>) -> Verdict {
        let formula = PrincipleFormula {
            formula: Formula::And(self.conjuncts),
            assignment: self.assignment,
        };
        Verdict {
            permissible: formula.holds(),
            principle,
            formula,
            bound_note,
        }
    }
}

/// Judges `plan` under `principle`. The plan must execute on `model` and
/// reach its goal. `budget` bounds the alternatives the act-utilitarian
/// principle compares against and is otherwise unused.
pub fn evaluate(
    principle: PrincipleId,
    model: &PlanningModel,
    plan: &Plan,
    budget: SearchBudget,
) -> Result<Verdict, EthicsError> {
    let plan = checked_plan(model, plan)?;
    let mut b = Builder::new();
    let mut note = None;
    match principle {
        PrincipleId::Deontology => b.no_bad_actions(model, &plan),
        PrincipleId::ActUtilitarian => {
            let alternatives = enumerate_plans(model, budget)?;
            let utility = model.final_state_utility(&plan);
            let dominated = alternatives
                .iter()
                .any(|alt| model.final_state_utility(alt) > utility);
            let atom = b.set(ReasonAtom::Dominated, dominated);
            b.conjuncts.push(Formula::not_atom(atom));
            note = Some(format!(
                "compared against {} alternative plan(s) of at most {} steps",
                alternatives.len(),
                budget.max_depth
            ));
        }
        PrincipleId::DoNoHarm => b.no_caused_harm(model, &plan),
        PrincipleId::DoNoInstrumentalHarm => b.no_harm_as_means(model, &plan),
        PrincipleId::DoubleEffect => {
            b.no_bad_actions(model, &plan);
            b.no_harmful_goal(model);
            b.no_harm_as_means(model, &plan);
            let proportional = model.final_state_utility(&plan) > 0;
            let atom = b.set(ReasonAtom::Proportional, proportional);
            b.conjuncts.push(Formula::atom(atom));
        }
    }
    Ok(b.finish(principle, note))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn run(principle: PrincipleId, model: &PlanningModel, steps: &[&str]) -> Verdict {
        let plan = model.execute(steps).unwrap();
        evaluate(principle, model, &plan, SearchBudget::default().with_depth(4)).unwrap()
    }

    #[test]
    fn lying_is_impermissible_under_deontology() {
        let v = run(PrincipleId::Deontology, &fixtures::robot_and_frank(), &["lie_frank", "exercise"]);
        assert!(!v.permissible);
        assert!(v.formula.assignment[&ReasonAtom::Bad("lie_frank".into())]);
        assert!(!v.formula.assignment[&ReasonAtom::Bad("exercise".into())]);
        assert_eq!(v.formula.formula.to_string(), "(¬Bad(lie_frank) & ¬Bad(exercise))");
    }

    #[test]
    fn begging_is_permissible_under_deontology() {
        let v = run(PrincipleId::Deontology, &fixtures::robot_and_frank(), &["beg_frank", "exercise"]);
        assert!(v.permissible);
    }

    #[test]
    fn empty_plan_is_vacuously_permissible() {
        let mut m = fixtures::robot_and_frank();
        m.goal.clear();
        let v = run(PrincipleId::Deontology, &m, &[]);
        assert!(v.permissible);
        assert_eq!(v.formula.formula, Formula::truth());
    }

    #[test]
    fn utilitarian_ties_are_permissible() {
        let m = fixtures::robot_and_frank();
        for steps in [["lie_frank", "exercise"], ["beg_frank", "exercise"]] {
            let v = run(PrincipleId::ActUtilitarian, &m, &steps);
            assert!(v.permissible);
            assert!(!v.formula.assignment[&ReasonAtom::Dominated]);
            assert!(v.bound_note.as_deref().unwrap().contains("at most 4 steps"));
        }
    }

    #[test]
    fn dominated_plan_is_impermissible() {
        let mut m = fixtures::robot_and_frank();
        m.goal.clear();
        // Doing nothing leaves Frank unhealthy while exercising plans exist.
        let v = run(PrincipleId::ActUtilitarian, &m, &[]);
        assert!(!v.permissible);
    }

    #[test]
    fn medicine_passes_double_effect() {
        let m = fixtures::medicine();
        let v = run(PrincipleId::DoubleEffect, &m, &["treat"]);
        assert!(v.permissible, "{}", v.formula.formula);
        let a = &v.formula.assignment;
        assert!(a[&ReasonAtom::CausesHarm("treat".into(), Fact::from("side_pain"))]);
        assert!(!a[&ReasonAtom::Means(Fact::from("side_pain"))]);
        assert!(!a[&ReasonAtom::GoalHarm(Fact::from("side_pain"))]);
        assert!(a[&ReasonAtom::Proportional]);
        // Pain is still caused, so the stricter principle objects.
        assert!(!run(PrincipleId::DoNoHarm, &m, &["treat"]).permissible);
        assert!(run(PrincipleId::DoNoInstrumentalHarm, &m, &["treat"]).permissible);
    }

    #[test]
    fn shield_is_instrumental_harm() {
        let m = fixtures::shield();
        let v = run(PrincipleId::DoNoInstrumentalHarm, &m, &["push_bystander", "block_threat"]);
        assert!(!v.permissible);
        let a = &v.formula.assignment;
        assert!(a[&ReasonAtom::CausesHarm("push_bystander".into(), Fact::from("bystander_hurt"))]);
        assert!(a[&ReasonAtom::Means(Fact::from("bystander_hurt"))]);
        assert!(!run(PrincipleId::DoubleEffect, &m, &["push_bystander", "block_threat"]).permissible);
    }

    #[test]
    fn fixture_causal_links() {
        let m = fixtures::robot_and_frank();
        for first in ["lie_frank", "beg_frank"] {
            let plan = m.execute(&[first, "exercise"]).unwrap();
            let links: Vec<String> = causal_links(&m, &plan).iter().map(ToString::to_string).collect();
            assert_eq!(links, ["(0, motivated, 1)", "(1, healthy, Goal)"]);
        }
        let mut trivial = m.clone();
        trivial.goal = trivial.init.clone();
        let empty = trivial.execute::<&str>(&[]).unwrap();
        assert!(causal_links(&trivial, &empty).is_empty());
    }

    #[test]
    fn invalid_plans_are_rejected() {
        let m = fixtures::robot_and_frank();
        let plan = m.execute(&["lie_frank"]).unwrap();
        assert!(matches!(
            evaluate(PrincipleId::Deontology, &m, &plan, SearchBudget::default()),
            Err(EthicsError::InvalidPlan(_))
        ));
    }

    #[test]
    fn atoms_round_trip_through_text() {
        let atoms = [
            ReasonAtom::Bad("lie_frank".into()),
            ReasonAtom::CausesHarm("treat".into(), Fact::from("side_pain")),
            ReasonAtom::Means(Fact::from("x")),
            ReasonAtom::GoalHarm(Fact::from("y")),
            ReasonAtom::Dominated,
            ReasonAtom::Proportional,
        ];
        for a in atoms {
            assert_eq!(a.to_string().parse::<ReasonAtom>().unwrap(), a);
        }
        assert!("Bad()".parse::<ReasonAtom>().is_err());
        assert!("Worse(x)".parse::<ReasonAtom>().is_err());
    }

    #[test]
    fn principle_names() {
        for p in PrincipleId::ALL {
            assert_eq!(p.name().parse::<PrincipleId>().unwrap(), p);
        }
        assert_eq!("Double_Effect".parse::<PrincipleId>().unwrap(), PrincipleId::DoubleEffect);
        assert!("virtue".parse::<PrincipleId>().is_err());
    }
}
