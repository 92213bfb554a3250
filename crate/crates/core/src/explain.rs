//! Contrastive explanations: judge a plan and the plan obtained under a
//! moderator suggestion, and say in one sentence how they differ.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::compile::{compile, strip_auxiliaries, CompileError, Suggestion, ValidationFailed};
use crate::ethics::{evaluate, EthicsError, PrincipleId, ReasonAtom, Verdict};
use crate::logic::{Literal, LiteralSet};
use crate::model::{Plan, PlanningModel};
use crate::planner::{PlanError, PlanSource, Planner, SearchBudget};
use crate::reasons::{reasons_for, ReasonError, ReasonSet};

/// A plan to question, the suggestion questioning it and the principle to
/// judge both plans by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplanationProblem {
    pub model: PlanningModel,
    pub plan: Plan,
    pub suggestion: Suggestion,
    pub principle: PrincipleId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDiff {
    pub removed: Vec<String>,
    pub added: Vec<String>,
    pub common: Vec<String>,
}

impl PlanDiff {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }

    /// Actions that appear in only one of the plans.
    pub fn changed_actions(&self) -> BTreeSet<&str> {
        self.removed
            .iter()
            .chain(self.added.iter())
            .map(String::as_str)
            .collect()
    }
}

/// Multiset difference in both directions plus the multiset intersection,
/// each listed in order of occurrence.
pub fn plan_diff<S: AsRef<str>, T: AsRef<str>>(original: &[S], hplan: &[T]) -> PlanDiff {
    fn counts<S: AsRef<str>>(steps: &[S]) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for s in steps {
            *m.entry(s.as_ref()).or_insert(0) += 1;
        }
        m
    }
    let mut diff = PlanDiff::default();
    let mut in_h = counts(hplan);
    for s in original {
        match in_h.get_mut(s.as_ref()) {
            Some(n) if *n > 0 => {
                *n -= 1;
                diff.common.push(s.as_ref().to_string());
            }
            _ => diff.removed.push(s.as_ref().to_string()),
        }
    }
    let mut in_orig = counts(original);
    for s in hplan {
        match in_orig.get_mut(s.as_ref()) {
            Some(n) if *n > 0 => *n -= 1,
            _ => diff.added.push(s.as_ref().to_string()),
        }
    }
    diff
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastiveExplanation {
    pub original_steps: Vec<String>,
    pub original_verdict: Verdict,
    pub original_reasons: ReasonSet<ReasonAtom>,
    pub hplan: Vec<String>,
    pub h_verdict: Verdict,
    pub h_reasons: ReasonSet<ReasonAtom>,
    pub diff: PlanDiff,
    pub nl: String,
}

impl ContrastiveExplanation {
    /// The structured payload served by the API and printed by the CLI.
    pub fn payload(&self) -> Value {
        json!({
            "original": plan_report(&self.original_steps, &self.original_verdict, &self.original_reasons),
            "hplan": plan_report(&self.hplan, &self.h_verdict, &self.h_reasons),
            "diff": {
                "removed": self.diff.removed,
                "added": self.diff.added,
                "common": self.diff.common,
            },
            "nl": self.nl,
        })
    }

    /// Pretty-printed payload with a trailing newline; the exact bytes the
    /// service and the CLI emit.
    pub fn payload_text(&self) -> String {
        to_payload_text(&self.payload())
    }
}

pub fn to_payload_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn verdict_json(v: &Verdict) -> Value {
    let assignment: BTreeMap<String, bool> = v
        .formula
        .assignment
        .iter()
        .map(|(a, b)| (a.to_string(), *b))
        .collect();
    json!({
        "permissible": v.permissible,
        "principle": v.principle.name(),
        "formula": v.formula.formula.to_string(),
        "assignment": assignment,
        "bound_note": v.bound_note,
    })
}

fn reasons_json(r: &ReasonSet<ReasonAtom>) -> Value {
    json!({
        "sufficient": r.sufficient.iter().map(LiteralSet::term_string).collect::<Vec<_>>(),
        "necessary": r.necessary.iter().map(LiteralSet::clause_string).collect::<Vec<_>>(),
        "sufficient_and_necessary": r.sufficient_and_necessary.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

/// `{steps, verdict, reasons}` for one plan.
pub fn plan_report<S: AsRef<str>>(steps: &[S], verdict: &Verdict, reasons: &ReasonSet<ReasonAtom>) -> Value {
    json!({
        "steps": steps.iter().map(|s| s.as_ref()).collect::<Vec<_>>(),
        "verdict": verdict_json(verdict),
        "reasons": reasons_json(reasons),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("invalid explanation problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("no plan satisfies the suggestion (provenance: {})", provenance.join(", "))]
    NoPlanFound { provenance: Vec<String> },
    #[error("planning for the suggestion exceeded the search budget")]
    BudgetExceeded,
    #[error(transparent)]
    ValidationFailed(#[from] ValidationFailed),
    #[error(transparent)]
    Ethics(#[from] EthicsError),
    #[error(transparent)]
    Reasons(#[from] ReasonError),
}

/// Everything produced while solving an explanation problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explained {
    pub explanation: ContrastiveExplanation,
    pub hmodel: PlanningModel,
    /// The hypothetical plan as executed on the hypothetical model.
    pub hplan: Plan,
}

/// Runs explanation problems against a planning system.
pub struct Explainer<'p> {
    planner: &'p dyn PlanSource,
    /// Bounds the alternatives considered by the act-utilitarian principle.
    budget: SearchBudget,
}

impl<'p> Explainer<'p> {
    pub fn new(planner: &'p dyn PlanSource, budget: SearchBudget) -> Self {
        Explainer { planner, budget }
    }

    /// Compile, re-plan, validate the new plan against the original model,
    /// judge both plans and render the contrast.
    pub fn solve(&self, problem: &ExplanationProblem) -> Result<Explained, ExplainError> {
        let model = &problem.model;
        let original = model
            .execute(&problem.plan.steps)
            .map_err(|e| ExplainError::InvalidProblem(e.to_string()))?;
        if !model.satisfies_goal(&original) {
            return Err(ExplainError::InvalidProblem("the plan does not achieve the goal".into()));
        }

        let compiled = compile(model, &problem.suggestion)?;
        let hplan = self.planner.find_plan(&compiled.hmodel).map_err(|e| match e {
            PlanError::BudgetExceeded { .. } => ExplainError::BudgetExceeded,
            _ => ExplainError::NoPlanFound {
                provenance: compiled.hmodel.provenance.clone(),
            },
        })?;

        let steps = strip_auxiliaries(model, &hplan.steps)?;
        let in_original = model.execute(&steps).map_err(ValidationFailed::from)?;
        if !model.satisfies_goal(&in_original) {
            return Err(ValidationFailed {
                step: None,
                reason: "the plan does not achieve the original goal".into(),
            }
            .into());
        }

        let original_verdict = evaluate(problem.principle, model, &original, self.budget)?;
        let h_verdict = evaluate(problem.principle, model, &in_original, self.budget)?;
        let original_reasons = reasons_for(&original_verdict)?;
        let h_reasons = reasons_for(&h_verdict)?;
        let diff = plan_diff(&original.steps, &steps);
        let nl = render_nl(
            model,
            &diff,
            (&original_verdict, &original_reasons),
            (&h_verdict, &h_reasons),
        );

        Ok(Explained {
            explanation: ContrastiveExplanation {
                original_steps: original.steps,
                original_verdict,
                original_reasons,
                hplan: steps,
                h_verdict,
                h_reasons,
                diff,
                nl,
            },
            hmodel: compiled.hmodel,
            hplan,
        })
    }
}

/// Solves a problem with the built-in minimum-cost planner.
pub fn solve_explanation_problem(
    problem: &ExplanationProblem,
    budget: SearchBudget,
) -> Result<ContrastiveExplanation, ExplainError> {
    let planner = Planner {
        budget,
        ..Planner::default()
    };
    Explainer::new(&planner, budget)
        .solve(problem)
        .map(|e| e.explanation)
}

// ---------------------------------------------------------------------------
// Natural language

/// A reason picked for display and how its literals combine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChosenReason {
    pub literals: Vec<Literal<ReasonAtom>>,
    /// True for a necessary clause (literals joined by "or").
    pub disjunctive: bool,
}

/// Picks the reason to verbalize: sufficient-and-necessary reasons first,
/// then sufficient terms, then necessary clauses, each ranked shortest
/// first. A reason whose atoms all concern changed actions wins over the
/// ranking when one exists.
pub fn choose_reason(reasons: &ReasonSet<ReasonAtom>, changed: &BTreeSet<&str>) -> Option<ChosenReason> {
    let candidates = reasons
        .sufficient_and_necessary
        .iter()
        .map(|l| ChosenReason {
            literals: vec![l.clone()],
            disjunctive: false,
        })
        .chain(reasons.sufficient.iter().map(|t| ChosenReason {
            literals: t.iter().cloned().collect(),
            disjunctive: false,
        }))
        .chain(reasons.necessary.iter().map(|c| ChosenReason {
            literals: c.iter().cloned().collect(),
            disjunctive: true,
        }));
    let about_changes = |r: &ChosenReason| {
        !r.literals.is_empty()
            && r.literals.iter().all(|l| {
                let mut acts = l.atom.actions().peekable();
                acts.peek().is_some() && acts.all(|a| changed.contains(a))
            })
    };
    let all: Vec<ChosenReason> = candidates.collect();
    all.iter()
        .find(|r| about_changes(r))
        .or_else(|| all.first())
        .cloned()
}

fn phrase_literal(model: &PlanningModel, lit: &Literal<ReasonAtom>) -> String {
    let name = |n: &str| model.display_phrase(n).map(str::to_string);
    let (yes, no) = match &lit.atom {
        ReasonAtom::Bad(a) => match name(a) {
            Some(a) => (format!("{a} is bad"), format!("{a} is not bad")),
            None => return lit.to_string(),
        },
        ReasonAtom::CausesHarm(a, f) => match (name(a), name(f.name())) {
            (Some(a), Some(f)) => (format!("{a} causes {f}"), format!("{a} does not cause {f}")),
            _ => return lit.to_string(),
        },
        ReasonAtom::Means(f) => match name(f.name()) {
            Some(f) => (
                format!("{f} is a means to the goal"),
                format!("{f} is not a means to the goal"),
            ),
            None => return lit.to_string(),
        },
        ReasonAtom::GoalHarm(f) => match name(f.name()) {
            Some(f) => (format!("{f} is part of the goal"), format!("{f} is not part of the goal")),
            None => return lit.to_string(),
        },
        ReasonAtom::Dominated => (
            "another plan reaches a higher utility".to_string(),
            "no other plan reaches a higher utility".to_string(),
        ),
        ReasonAtom::Proportional => (
            "its benefits outweigh its harms".to_string(),
            "its benefits do not outweigh its harms".to_string(),
        ),
    };
    if lit.positive {
        yes
    } else {
        no
    }
}

fn phrase_reason(model: &PlanningModel, reason: Option<&ChosenReason>) -> String {
    match reason {
        Some(r) if !r.literals.is_empty() => {
            let parts: Vec<String> = r.literals.iter().map(|l| phrase_literal(model, l)).collect();
            parts.join(if r.disjunctive { " or " } else { " and " })
        }
        _ => "nothing in it bears on the principle".to_string(),
    }
}

/// One-sentence contrast between the original plan and the HPlan.
pub fn render_nl(
    model: &PlanningModel,
    diff: &PlanDiff,
    original: (&Verdict, &ReasonSet<ReasonAtom>),
    hypothetical: (&Verdict, &ReasonSet<ReasonAtom>),
) -> String {
    let changed = diff.changed_actions();
    let r1 = phrase_reason(model, choose_reason(original.1, &changed).as_ref());
    let r2 = phrase_reason(model, choose_reason(hypothetical.1, &changed).as_ref());
    let (v1, v2) = (original.0.label(), hypothetical.0.label());
    if v1 != v2 {
        format!("The original plan is {v1} because {r1}, whereas the HPlan is {v2} because {r2}")
    } else if diff.is_empty() {
        format!("Both plans are {v1} because {r1}")
    } else {
        format!("Both plans are {v1}: the original plan because {r1}, and the HPlan because {r2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const EXPECTED_SENTENCE: &str = "The original plan is impermissible because lying to Frank is bad, \
                                  whereas the HPlan is permissible because begging Frank is not bad";

    fn problem(suggestion: &str, principle: PrincipleId) -> ExplanationProblem {
        let model = fixtures::robot_and_frank();
        let plan = model.execute(&["lie_frank", "exercise"]).unwrap();
        ExplanationProblem {
            model,
            plan,
            suggestion: suggestion.parse().unwrap(),
            principle,
        }
    }

    #[test]
    fn diff_of_fixture_plans() {
        let d = plan_diff(&["lie_frank", "exercise"], &["beg_frank", "exercise"]);
        assert_eq!(d.removed, ["lie_frank"]);
        assert_eq!(d.added, ["beg_frank"]);
        assert_eq!(d.common, ["exercise"]);
    }

    #[test]
    fn diff_edge_cases() {
        let same = plan_diff(&["a", "b"], &["a", "b"]);
        assert!(same.is_empty());
        assert_eq!(same.common, ["a", "b"]);
        let d = plan_diff::<&str, &str>(&[], &["a"]);
        assert!(d.removed.is_empty());
        assert_eq!(d.added, ["a"]);
        let d = plan_diff(&["a", "a", "b"], &["a", "c", "a", "a"]);
        assert_eq!((d.removed, d.added, d.common), (vec!["b".to_string()], vec!["c".to_string(), "a".to_string()], vec!["a".to_string(), "a".to_string()]));
    }

    #[test]
    fn replace_lie_with_beg_reproduces_the_contrast() {
        let e = solve_explanation_problem(
            &problem("replace lie_frank with beg_frank", PrincipleId::Deontology),
            SearchBudget::default(),
        )
        .unwrap();
        assert_eq!(e.hplan, ["beg_frank", "exercise"]);
        assert!(!e.original_verdict.permissible);
        assert!(e.h_verdict.permissible);
        assert_eq!(e.nl, EXPECTED_SENTENCE);
    }

    #[test]
    fn irrelevant_forbid_gives_same_verdicts() {
        let mut p = problem("forbid beg_frank", PrincipleId::Deontology);
        p.plan = p.model.execute(&["lie_frank", "exercise"]).unwrap();
        let e = solve_explanation_problem(&p, SearchBudget::default()).unwrap();
        assert_eq!(e.hplan, e.original_steps);
        assert_eq!(e.original_verdict, e.h_verdict);
        assert_eq!(e.nl, "Both plans are impermissible because lying to Frank is bad");
    }

    #[test]
    fn unreachable_goal_reports_provenance() {
        let base = fixtures::robot_and_frank();
        let model = compile(&base, &"forbid lie_frank".parse().unwrap()).unwrap().hmodel;
        let plan = model.execute(&["beg_frank", "exercise"]).unwrap();
        let p = ExplanationProblem {
            model,
            plan,
            suggestion: "forbid beg_frank".parse().unwrap(),
            principle: PrincipleId::Deontology,
        };
        assert_eq!(
            solve_explanation_problem(&p, SearchBudget::default()),
            Err(ExplainError::NoPlanFound {
                provenance: vec!["forbid lie_frank".into(), "forbid beg_frank".into()]
            })
        );
    }

    #[test]
    fn plan_missing_the_goal_is_rejected() {
        let mut p = problem("forbid beg_frank", PrincipleId::Deontology);
        p.plan = p.model.execute(&["lie_frank"]).unwrap();
        assert!(matches!(
            solve_explanation_problem(&p, SearchBudget::default()),
            Err(ExplainError::InvalidProblem(_))
        ));
    }

    #[test]
    fn missing_display_phrase_falls_back_to_atom() {
        let mut model = fixtures::robot_and_frank();
        model.display.remove("lie_frank");
        let lit = Literal::pos(ReasonAtom::Bad("lie_frank".into()));
        assert_eq!(phrase_literal(&model, &lit), "Bad(lie_frank)");
        let neg = Literal::neg(ReasonAtom::Bad("x_1".into()));
        assert_eq!(phrase_literal(&model, &neg), "¬Bad(x_1)");
    }

    #[test]
    fn payload_has_fixed_top_level_fields() {
        let e = solve_explanation_problem(
            &problem("replace lie_frank with beg_frank", PrincipleId::Deontology),
            SearchBudget::default(),
        )
        .unwrap();
        let v = e.payload();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["diff", "hplan", "nl", "original"]);
        assert_eq!(v["original"]["reasons"]["sufficient_and_necessary"], json!(["Bad(lie_frank)"]));
        assert_eq!(v["hplan"]["steps"], json!(["beg_frank", "exercise"]));
        assert_eq!(v["diff"]["removed"], json!(["lie_frank"]));
        assert!(e.payload_text().ends_with("}\n"));
    }
}
