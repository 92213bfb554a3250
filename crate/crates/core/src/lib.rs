//! Moral permissibility checking and contrastive explanations for classical
//! plans.
//!
//! The pipeline: parse a grounded planning model ([`parser`]), find a plan
//! ([`planner`]), judge it under an ethical principle ([`ethics`]), extract
//! prime-implicate reasons ([`reasons`]), compile a moderator's suggestion
//! into a hypothetical model ([`compile`]) and contrast the two plans
//! ([`explain`]).

pub mod compile;
pub mod ethics;
pub mod explain;
pub mod fixtures;
pub mod logic;
pub mod model;
pub mod parser;
pub mod planner;
pub mod reasons;

pub use compile::{compile, compile_chain, strip_auxiliaries, CompileError, HModelResult, Suggestion, ValidationFailed};
pub use ethics::{causal_links, evaluate, CausalLink, EthicsError, PrincipleId, ReasonAtom, Verdict};
pub use explain::{
    plan_diff, solve_explanation_problem, ContrastiveExplanation, ExplainError, Explained, Explainer,
    ExplanationProblem, PlanDiff,
};
pub use model::{apply_action, Action, Fact, IntrinsicValue, ModelError, Plan, PlanningModel, State};
pub use parser::{parse_model, serialize_model, ParseError, SourceDocument};
pub use planner::{enumerate_plans, find_plan, Objective, PlanError, PlanSource, Planner, SearchBudget};
pub use reasons::{prime_implicants, prime_implicates, reasons_for, to_clausal_form, ReasonError, ReasonSet};
