//! Prime implicates and implicants, and the reasons they give for a verdict.
//!
//! Prime implicates come from resolution saturation with subsumption
//! deletion. Prime implicants of `f` are the complemented prime implicates
//! of `¬f`.
//!
//! For a verdict, the target is the principle formula when the plan is
//! permissible and its negation otherwise. A *sufficient* reason is a prime
//! implicant of the target made entirely of literals true for the plan. A
//! *necessary* reason is a prime implicate of the target cut down to its
//! literals that are true for the plan: if all of them were false, with
//! everything else unchanged, the target would fail.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ethics::{ReasonAtom, Verdict};
use crate::logic::{Clause, Formula, Literal, LiteralSet, Term};

/// Upper bound on clauses held during CNF conversion and saturation.
pub const MAX_CLAUSES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonError {
    #[error("formula too large: more than {MAX_CLAUSES} clauses")]
    SizeExceeded,
    #[error("the target formula is false under the assignment")]
    TargetFalse,
}

/// Exact CNF by distribution. Tautological and duplicate clauses are dropped.
pub fn to_clausal_form<A: Ord + Clone>(formula: &Formula<A>) -> Result<Vec<Clause<A>>, ReasonError> {
    let clauses = match formula {
        Formula::Lit(l) => vec![LiteralSet::from_iter([l.clone()])],
        Formula::And(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(to_clausal_form(p)?);
                if out.len() > MAX_CLAUSES {
                    return Err(ReasonError::SizeExceeded);
                }
            }
            out
        }
        Formula::Or(parts) => {
            // The empty disjunction is the single empty clause.
            let mut acc: Vec<Clause<A>> = vec![LiteralSet::new()];
            for p in parts {
                let rhs = to_clausal_form(p)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &rhs {
                        let merged: Clause<A> = a.iter().chain(b.iter()).cloned().collect();
                        if !merged.is_complementary() {
                            next.push(merged);
                        }
                    }
                    if next.len() > MAX_CLAUSES {
                        return Err(ReasonError::SizeExceeded);
                    }
                }
                acc = next;
            }
            acc
        }
    };
    let mut seen = std::collections::BTreeSet::new();
    Ok(clauses
        .into_iter()
        .filter(|c| !c.is_complementary() && seen.insert(c.clone()))
        .collect())
}

/// Resolvent of `a` and `b` on `lit ∈ a`, `¬lit ∈ b`; `None` if tautological.
fn resolve<A: Ord + Clone>(a: &Clause<A>, b: &Clause<A>, lit: &Literal<A>) -> Option<Clause<A>> {
    let comp = lit.complement();
    let r: Clause<A> = a
        .iter()
        .filter(|l| *l != lit)
        .chain(b.iter().filter(|l| **l != comp))
        .cloned()
        .collect();
    (!r.is_complementary()).then_some(r)
}

/// Keeps only clauses not subsumed by (proper subsets of, or equal to an
/// earlier) another clause.
fn remove_subsumed<A: Ord + Clone>(clauses: Vec<Clause<A>>) -> Vec<Clause<A>> {
    let mut sorted = clauses;
    sorted.sort_by(LiteralSet::display_order);
    sorted.dedup();
    let mut kept: Vec<Clause<A>> = Vec::with_capacity(sorted.len());
    for c in sorted {
        if !kept.iter().any(|k| k.is_subset(&c)) {
            kept.push(c);
        }
    }
    kept
}

/// All prime implicates of a clause set, in canonical order (shortest
/// first). An unsatisfiable set yields the single empty clause; a valid one
/// yields no clauses.
pub fn prime_implicates<A: Ord + Clone>(clauses: &[Clause<A>]) -> Result<Vec<Clause<A>>, ReasonError> {
    let mut set = remove_subsumed(clauses.iter().filter(|c| !c.is_complementary()).cloned().collect());
    // `fresh` holds clauses not yet resolved against everything else.
    let mut fresh = set.clone();
    while !fresh.is_empty() {
        let mut produced = Vec::new();
        for a in &fresh {
            for b in &set {
                for lit in a.iter() {
                    if !b.contains(&lit.complement()) {
                        continue;
                    }
                    if let Some(r) = resolve(a, b, lit) {
                        if !set.iter().chain(produced.iter()).any(|k: &Clause<A>| k.is_subset(&r)) {
                            produced.push(r);
                        }
                    }
                }
            }
            if produced.len() + set.len() > MAX_CLAUSES {
                return Err(ReasonError::SizeExceeded);
            }
        }
        let produced = remove_subsumed(produced);
        set.retain(|c| !produced.iter().any(|p| p.is_subset(c)));
        set.extend(produced.iter().cloned());
        fresh = produced;
    }
    set.sort_by(LiteralSet::display_order);
    Ok(set)
}

/// All prime implicants of `formula`, shortest first. A valid formula yields
/// the single empty term; an unsatisfiable one yields none.
pub fn prime_implicants<A: Ord + Clone>(formula: &Formula<A>) -> Result<Vec<Term<A>>, ReasonError> {
    let negated = to_clausal_form(&formula.negate())?;
    let mut terms: Vec<Term<A>> = prime_implicates(&negated)?
        .iter()
        .map(LiteralSet::complemented)
        .collect();
    terms.sort_by(LiteralSet::display_order);
    Ok(terms)
}

/// Prime implicates of a formula (convenience wrapper).
pub fn formula_implicates<A: Ord + Clone>(formula: &Formula<A>) -> Result<Vec<Clause<A>>, ReasonError> {
    prime_implicates(&to_clausal_form(formula)?)
}

/// Sufficient and necessary reasons for a formula that holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "A: Ord + Serialize",
    deserialize = "A: Ord + Deserialize<'de>"
))]
pub struct ReasonSet<A: Ord> {
    /// Terms that entail the target, all literals true.
    pub sufficient: Vec<Term<A>>,
    /// Implicates of the target cut down to their true literals.
    pub necessary: Vec<Clause<A>>,
    /// Single literals that are both a sufficient and a necessary reason.
    pub sufficient_and_necessary: Vec<Literal<A>>,
}

impl<A: Ord + Clone> ReasonSet<A> {
    pub fn is_sufficient_and_necessary(&self, lit: &Literal<A>) -> bool {
        self.sufficient_and_necessary.contains(lit)
    }
}

/// Reasons why `target` holds under `assignment`.
pub fn reasons_for_formula<A: Ord + Clone>(
    target: &Formula<A>,
    assignment: &BTreeMap<A, bool>,
) -> Result<ReasonSet<A>, ReasonError> {
    if !target.eval(assignment) {
        return Err(ReasonError::TargetFalse);
    }
    let sufficient: Vec<Term<A>> = prime_implicants(target)?
        .into_iter()
        .filter(|t| t.all_hold(assignment))
        .collect();
    let cut: Vec<Clause<A>> = formula_implicates(target)?
        .iter()
        .map(|c| c.iter().filter(|l| l.holds(assignment)).cloned().collect::<Clause<A>>())
        .filter(|c| !c.is_empty())
        .collect();
    let necessary = remove_subsumed(cut);
    let sufficient_and_necessary = sufficient
        .iter()
        .filter(|t| t.len() == 1 && necessary.contains(t))
        .filter_map(|t| t.iter().next().cloned())
        .collect();
    Ok(ReasonSet {
        sufficient,
        necessary,
        sufficient_and_necessary,
    })
}

/// Reasons for a verdict: why the formula holds if the plan is permissible,
/// why it fails otherwise.
pub fn reasons_for(verdict: &Verdict) -> Result<ReasonSet<ReasonAtom>, ReasonError> {
    let formula = &verdict.formula.formula;
    let target = if verdict.permissible {
        formula.clone()
    } else {
        formula.negate()
    };
    reasons_for_formula(&target, &verdict.formula.assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ethics::{evaluate, PrincipleId};
    use crate::fixtures;
    use crate::planner::SearchBudget;

    fn lit(s: &str) -> Literal<String> {
        match s.strip_prefix('-') {
            Some(a) => Literal::neg(a.to_string()),
            None => Literal::pos(s.to_string()),
        }
    }

    fn clause(lits: &[&str]) -> Clause<String> {
        lits.iter().map(|s| lit(s)).collect()
    }

    fn f(s: &str) -> Formula<String> {
        Formula::Lit(lit(s))
    }

    #[test]
    fn cnf_of_conjunction_is_itself() {
        let phi = Formula::And(vec![f("-bad_lie"), f("-bad_exercise")]);
        assert_eq!(
            to_clausal_form(&phi).unwrap(),
            vec![clause(&["-bad_lie"]), clause(&["-bad_exercise"])]
        );
        let g = Formula::And(vec![
            Formula::Or(vec![f("a"), f("b")]),
            Formula::Or(vec![f("-a"), f("c")]),
        ]);
        assert_eq!(to_clausal_form(&g).unwrap(), vec![clause(&["a", "b"]), clause(&["-a", "c"])]);
    }

    #[test]
    fn cnf_distributes_once() {
        let g = Formula::Or(vec![f("a"), Formula::And(vec![f("b"), f("c")])]);
        assert_eq!(to_clausal_form(&g).unwrap(), vec![clause(&["a", "b"]), clause(&["a", "c"])]);
    }

    #[test]
    fn cnf_drops_tautologies() {
        let g = Formula::Or(vec![f("a"), f("-a")]);
        assert!(to_clausal_form(&g).unwrap().is_empty());
    }

    #[test]
    fn cnf_size_guard() {
        // (a1 & b1) | (a2 & b2) | ... distributes into 2^n clauses.
        let g = Formula::Or(
            (0..15)
                .map(|i| Formula::And(vec![f(&format!("a{i}")), f(&format!("b{i}"))]))
                .collect(),
        );
        assert_eq!(to_clausal_form(&g), Err(ReasonError::SizeExceeded));
    }

    #[test]
    fn implicates_add_the_resolvent() {
        let pis = prime_implicates(&[clause(&["a", "b"]), clause(&["-a", "c"])]).unwrap();
        assert_eq!(pis, vec![clause(&["-a", "c"]), clause(&["a", "b"]), clause(&["b", "c"])]);
    }

    #[test]
    fn unit_clause_is_its_own_implicate() {
        assert_eq!(prime_implicates(&[clause(&["bad_lie"])]).unwrap(), vec![clause(&["bad_lie"])]);
    }

    #[test]
    fn contradiction_yields_empty_clause() {
        assert_eq!(
            prime_implicates(&[clause(&["a"]), clause(&["-a"])]).unwrap(),
            vec![Clause::new()]
        );
    }

    #[test]
    fn implicants_of_negated_deontic_formula() {
        let phi = Formula::And(vec![f("-bad_lie"), f("-bad_exercise")]);
        let pis = prime_implicants(&phi.negate()).unwrap();
        assert_eq!(pis, vec![clause(&["bad_exercise"]), clause(&["bad_lie"])]);
    }

    #[test]
    fn implicants_of_truth_and_conjunction() {
        assert_eq!(prime_implicants::<String>(&Formula::truth()).unwrap(), vec![Term::new()]);
        assert!(prime_implicants::<String>(&Formula::falsity()).unwrap().is_empty());
        let ab = Formula::And(vec![f("a"), f("b")]);
        assert_eq!(prime_implicants(&ab).unwrap(), vec![clause(&["a", "b"])]);
    }

    fn deontic_reasons(steps: &[&str]) -> ReasonSet<ReasonAtom> {
        let m = fixtures::robot_and_frank();
        let plan = m.execute(steps).unwrap();
        let v = evaluate(PrincipleId::Deontology, &m, &plan, SearchBudget::default()).unwrap();
        reasons_for(&v).unwrap()
    }

    #[test]
    fn lying_is_sufficient_and_necessary() {
        let r = deontic_reasons(&["lie_frank", "exercise"]);
        let bad_lie = Literal::pos(ReasonAtom::Bad("lie_frank".into()));
        assert_eq!(r.sufficient_and_necessary, vec![bad_lie.clone()]);
        assert_eq!(r.sufficient, vec![Term::from_iter([bad_lie.clone()])]);
        assert_eq!(r.necessary, vec![Clause::from_iter([bad_lie])]);
    }

    #[test]
    fn begging_plan_has_two_necessary_reasons() {
        let r = deontic_reasons(&["beg_frank", "exercise"]);
        let not_bad = |a: &str| Literal::neg(ReasonAtom::Bad(a.into()));
        assert_eq!(
            r.necessary,
            vec![
                Clause::from_iter([not_bad("beg_frank")]),
                Clause::from_iter([not_bad("exercise")]),
            ]
        );
        assert_eq!(
            r.sufficient,
            vec![Term::from_iter([not_bad("beg_frank"), not_bad("exercise")])]
        );
        assert!(r.sufficient_and_necessary.is_empty());
    }

    #[test]
    fn trivially_true_formula() {
        let r = reasons_for_formula::<String>(&Formula::truth(), &BTreeMap::new()).unwrap();
        assert_eq!(r.sufficient, vec![Term::new()]);
        assert!(r.necessary.is_empty());
    }

    #[test]
    fn false_target_is_an_error() {
        let a: BTreeMap<String, bool> = [("a".to_string(), false)].into();
        assert_eq!(reasons_for_formula(&f("a"), &a), Err(ReasonError::TargetFalse));
    }
}
