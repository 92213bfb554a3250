//! Brute-force reference implementations and random instance generators.
//!
//! Nothing here calls the search, resolution or execution code of
//! `ethiplan-core`; the oracles only read model data and step states or
//! truth tables themselves.

use std::collections::{BTreeMap, BTreeSet};

use ethiplan::logic::{Formula, Literal, LiteralSet};
use ethiplan::model::{Action, Fact, IntrinsicValue, PlanningModel};
use ethiplan::Suggestion;
use rand::seq::SliceRandom;
use rand::Rng;

type RawState = BTreeSet<String>;

/// A valid action sequence with its states and cost, found by brute force.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPlan {
    pub steps: Vec<String>,
    pub states: Vec<RawState>,
    pub cost: u64,
}

impl RawPlan {
    pub fn reaches(&self, goal: &BTreeSet<Fact>) -> bool {
        let last = self.states.last().unwrap();
        goal.iter().all(|f| last.contains(f.name()))
    }

    /// No state occurs twice along the trace.
    pub fn is_simple(&self) -> bool {
        let distinct: BTreeSet<&RawState> = self.states.iter().collect();
        distinct.len() == self.states.len()
    }
}

fn raw_step(state: &RawState, action: &Action) -> Option<RawState> {
    if !action.preconditions.iter().all(|p| state.contains(p.name())) {
        return None;
    }
    let mut next: RawState = state
        .iter()
        .filter(|f| !action.del_effects.iter().any(|d| d.name() == f.as_str()))
        .cloned()
        .collect();
    for a in &action.add_effects {
        next.insert(a.name().to_string());
    }
    Some(next)
}

/// Every executable action sequence of length at most `max_depth`,
/// including the empty one.
pub fn all_sequences(model: &PlanningModel, max_depth: usize) -> Vec<RawPlan> {
    let init: RawState = model.init.iter().map(|f| f.name().to_string()).collect();
    let mut out = vec![RawPlan {
        steps: vec![],
        states: vec![init],
        cost: 0,
    }];
    let mut frontier = out.clone();
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for p in &frontier {
            for a in model.actions.values() {
                if let Some(s) = raw_step(p.states.last().unwrap(), a) {
                    let mut q = p.clone();
                    q.steps.push(a.name.clone());
                    q.states.push(s);
                    q.cost += u64::from(a.cost);
                    next.push(q);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Minimum cost over all goal-reaching sequences of at most `max_depth` steps.
pub fn min_cost(model: &PlanningModel, max_depth: usize) -> Option<u64> {
    all_sequences(model, max_depth)
        .iter()
        .filter(|p| p.reaches(&model.goal))
        .map(|p| p.cost)
        .min()
}

/// Step lists of all goal-reaching simple-path sequences.
pub fn simple_path_plans(model: &PlanningModel, max_depth: usize) -> BTreeSet<Vec<String>> {
    all_sequences(model, max_depth)
        .into_iter()
        .filter(|p| p.is_simple() && p.reaches(&model.goal))
        .map(|p| p.steps)
        .collect()
}

fn truth_table_eval<A: Ord + Clone>(f: &Formula<A>, a: &BTreeMap<A, bool>) -> bool {
    match f {
        Formula::Lit(l) => a[&l.atom] == l.positive,
        Formula::And(fs) => fs.iter().all(|g| truth_table_eval(g, a)),
        Formula::Or(fs) => fs.iter().any(|g| truth_table_eval(g, a)),
    }
}

fn all_assignments<A: Ord + Clone>(atoms: &[A]) -> Vec<BTreeMap<A, bool>> {
    (0u32..(1 << atoms.len()))
        .map(|bits| {
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), bits >> i & 1 == 1))
                .collect()
        })
        .collect()
}

/// Every consistent literal set over `atoms`: each atom absent, positive or negative.
fn all_literal_sets<A: Ord + Clone>(atoms: &[A]) -> Vec<LiteralSet<A>> {
    let mut out = vec![Vec::new()];
    for a in atoms {
        let mut next = Vec::new();
        for s in &out {
            next.push(s.clone());
            let mut p = s.clone();
            p.push(Literal::pos(a.clone()));
            next.push(p);
            let mut n = s.clone();
            n.push(Literal::neg(a.clone()));
            next.push(n);
        }
        out = next;
    }
    out.into_iter().map(LiteralSet::from_iter).collect()
}

fn minimal<A: Ord + Clone>(sets: Vec<LiteralSet<A>>) -> BTreeSet<LiteralSet<A>> {
    sets.iter()
        .filter(|s| !sets.iter().any(|t| t != *s && t.0.is_subset(&s.0)))
        .cloned()
        .collect()
}

/// Prime implicates by enumeration: the minimal clauses over the formula's
/// atoms that hold in every model of the formula.
pub fn brute_prime_implicates<A: Ord + Clone>(f: &Formula<A>, atoms: &[A]) -> BTreeSet<LiteralSet<A>> {
    let models: Vec<_> = all_assignments(atoms)
        .into_iter()
        .filter(|a| truth_table_eval(f, a))
        .collect();
    let entailed = all_literal_sets(atoms)
        .into_iter()
        .filter(|c| models.iter().all(|m| c.iter().any(|l| m[&l.atom] == l.positive)))
        .collect();
    minimal(entailed)
}

/// Prime implicants by enumeration: the minimal terms whose every
/// extension to a full assignment satisfies the formula.
pub fn brute_prime_implicants<A: Ord + Clone>(f: &Formula<A>, atoms: &[A]) -> BTreeSet<LiteralSet<A>> {
    let all = all_assignments(atoms);
    let implicants = all_literal_sets(atoms)
        .into_iter()
        .filter(|t| {
            all.iter()
                .filter(|m| t.iter().all(|l| m[&l.atom] == l.positive))
                .all(|m| truth_table_eval(f, m))
        })
        .collect();
    minimal(implicants)
}

/// Whether `a` and `b` agree on every assignment over `atoms`.
pub fn equivalent<A: Ord + Clone>(a: &Formula<A>, b: &Formula<A>, atoms: &[A]) -> bool {
    all_assignments(atoms)
        .iter()
        .all(|m| truth_table_eval(a, m) == truth_table_eval(b, m))
}

pub fn eval_formula<A: Ord + Clone>(f: &Formula<A>, a: &BTreeMap<A, bool>) -> bool {
    truth_table_eval(f, a)
}

pub fn assignments<A: Ord + Clone>(atoms: &[A]) -> Vec<BTreeMap<A, bool>> {
    all_assignments(atoms)
}

// ---------------------------------------------------------------------------
// Generators

/// Random NNF formula over `atoms` with nesting up to `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[String], depth: usize) -> Formula<String> {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = atoms.choose(rng).unwrap().clone();
        return if rng.gen_bool(0.5) {
            Formula::atom(a)
        } else {
            Formula::not_atom(a)
        };
    }
    let n = rng.gen_range(0..=3);
    let parts = (0..n).map(|_| random_formula(rng, atoms, depth - 1)).collect();
    if rng.gen_bool(0.5) {
        Formula::And(parts)
    } else {
        Formula::Or(parts)
    }
}

/// Knobs for [`random_model`].
#[derive(Clone, Copy, Debug)]
pub struct ModelShape {
    pub max_facts: usize,
    pub max_actions: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_facts: 6,
            max_actions: 5,
        }
    }
}

/// Random grounded model with utilities, intrinsic values and display
/// phrases for some actions.
pub fn random_model<R: Rng>(rng: &mut R, shape: ModelShape) -> PlanningModel {
    let n_facts = rng.gen_range(1..=shape.max_facts);
    let n_actions = rng.gen_range(1..=shape.max_actions);
    let facts: Vec<String> = (0..n_facts).map(|i| format!("f{i}")).collect();
    let pick = |rng: &mut R, p: f64| -> Vec<String> {
        facts.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
    };
    let mut model = PlanningModel {
        domain_name: "random".into(),
        problem_name: format!("p{}", rng.gen_range(0..1000)),
        facts: facts.iter().map(|f| Fact::new(f.as_str())).collect(),
        init: pick(rng, 0.3).into_iter().map(Fact::new).collect(),
        goal: pick(rng, 0.3).into_iter().map(Fact::new).collect(),
        ..Default::default()
    };
    for f in &facts {
        if rng.gen_bool(0.5) {
            model.utility.set(Fact::new(f.as_str()), rng.gen_range(-10..=10));
        }
    }
    for i in 0..n_actions {
        let name = format!("a{i}");
        let intrinsic = *[IntrinsicValue::Good, IntrinsicValue::Neutral, IntrinsicValue::Bad]
            .choose(rng)
            .unwrap();
        let action = Action::new(name.as_str())
            .with_pre(pick(rng, 0.25))
            .with_add(pick(rng, 0.3))
            .with_del(pick(rng, 0.2))
            .with_cost(rng.gen_range(0..=4))
            .with_intrinsic(intrinsic);
        if rng.gen_bool(0.5) {
            model.display.insert(name, format!("doing \"{i}\""));
        }
        model.insert_action(action);
    }
    model
}

/// A random suggestion referring to actions of `model`. Replace always
/// names two distinct actions; models with one action get forbid/force/order.
pub fn random_suggestion<R: Rng>(rng: &mut R, model: &PlanningModel) -> Suggestion {
    let names: Vec<&String> = model.actions.keys().collect();
    let a = (*names.choose(rng).unwrap()).clone();
    let b = (*names.choose(rng).unwrap()).clone();
    match rng.gen_range(0..4) {
        0 => Suggestion::Forbid(a),
        1 => Suggestion::Force(a),
        2 if a != b => Suggestion::Replace {
            forbidden: a,
            forced: b,
        },
        _ => Suggestion::Order { earlier: a, later: b },
    }
}
