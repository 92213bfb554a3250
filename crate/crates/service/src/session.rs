use chrono::{DateTime, Utc};
use ethiplan::explain::plan_report;
use ethiplan::{
    evaluate, find_plan, parse_model, reasons_for, ContrastiveExplanation, Explainer, ExplanationProblem,
    Objective, Plan, Planner, PlanningModel, PrincipleId, SearchBudget, SourceDocument, Suggestion,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ApiError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum Outcome {
    Explained {
        explanation: ContrastiveExplanation,
        hmodel: PlanningModel,
        /// The HPlan as executed on `hmodel`.
        hplan: Plan,
    },
    Failed {
        code: String,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub suggestion: Suggestion,
    pub principle: PrincipleId,
    /// Provenance of the model the suggestion was compiled against.
    pub based_on: Vec<String>,
    pub committed: bool,
    pub outcome: Outcome,
}

/// One moderator's exploration of one planning problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub objective: Objective,
    pub budget: SearchBudget,
    pub base_model: PlanningModel,
    pub current_model: PlanningModel,
    pub current_plan: Plan,
    pub history: Vec<HistoryEntry>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl Session {
    /// Parses the documents and plans for them, or adopts `imported` steps
    /// when given.
    pub fn create(
        domain: &SourceDocument,
        problem: &SourceDocument,
        objective: Objective,
        budget: SearchBudget,
        imported: Option<&[String]>,
    ) -> Result<Session, ApiError> {
        let model = parse_model(domain, problem)?;
        let plan = match imported {
            Some(steps) => {
                let plan = model
                    .execute(steps)
                    .map_err(|e| ApiError::unprocessable("InvalidPlan", e.to_string()))?;
                if !model.satisfies_goal(&plan) {
                    return Err(ApiError::unprocessable("InvalidPlan", "the plan does not achieve the goal"));
                }
                plan
            }
            None => find_plan(&model, objective, budget)?,
        };
        let now = Utc::now();
        Ok(Session {
            id: uuid::Uuid::new_v4().to_string(),
            objective,
            budget,
            base_model: model.clone(),
            current_model: model,
            current_plan: plan,
            history: Vec::new(),
            created_at: now,
            updated_at: now,
        })
    }

    pub fn summary(&self) -> Value {
        json!({
            "id": self.id,
            "objective": self.objective,
            "budget": self.budget,
            "plan": self.plan_view(),
            "provenance": self.current_model.provenance,
            "actions": self.current_model.actions.keys().collect::<Vec<_>>(),
            "history_len": self.history.len(),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        })
    }

    pub fn plan_view(&self) -> Value {
        let m = &self.current_model;
        let steps: Vec<Value> = self
            .current_plan
            .steps
            .iter()
            .map(|s| {
                let a = m.action(s);
                json!({
                    "name": s,
                    "intrinsic": a.map(|a| a.intrinsic.keyword()),
                    "cost": a.map(|a| a.cost),
                    "phrase": m.display_phrase(s),
                })
            })
            .collect();
        json!({
            "steps": steps,
            "cost": self.current_plan.total_cost,
            "utility": m.final_state_utility(&self.current_plan),
        })
    }

    pub fn evaluate(&self, principle: PrincipleId) -> Result<Value, ApiError> {
        let verdict = evaluate(principle, &self.current_model, &self.current_plan, self.budget)
            .map_err(|e| ApiError::from(ethiplan::ExplainError::from(e)))?;
        let reasons = reasons_for(&verdict).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(plan_report(&self.current_plan.steps, &verdict, &reasons))
    }

    /// Explains `suggestion` against the current plan. Outcomes past input
    /// validation are recorded in the history, failures included.
    pub fn suggest(&mut self, suggestion: Suggestion, principle: PrincipleId) -> Result<ContrastiveExplanation, ApiError> {
        let problem = ExplanationProblem {
            model: self.current_model.clone(),
            plan: self.current_plan.clone(),
            suggestion: suggestion.clone(),
            principle,
        };
        let planner = Planner {
            objective: self.objective,
            budget: self.budget,
        };
        let result = Explainer::new(&planner, self.budget).solve(&problem);
        let (outcome, reply) = match result {
            Ok(done) => {
                let e = done.explanation.clone();
                (
                    Outcome::Explained {
                        explanation: done.explanation,
                        hmodel: done.hmodel,
                        hplan: done.hplan,
                    },
                    Ok(e),
                )
            }
            Err(e) => {
                let err = ApiError::from(e);
                if !err.status.is_client_error() || err.status.as_u16() == 400 {
                    return Err(err);
                }
                (
                    Outcome::Failed {
                        code: err.code.clone(),
                        message: err.message.clone(),
                    },
                    Err(err),
                )
            }
        };
        self.history.push(HistoryEntry {
            suggestion,
            principle,
            based_on: self.current_model.provenance.clone(),
            committed: false,
            outcome,
        });
        self.updated_at = Utc::now();
        reply
    }

    /// Adopts a history entry's HModel and HPlan as the current state.
    pub fn commit(&mut self, index: usize) -> Result<(), ApiError> {
        let entry = self.history.get(index).ok_or_else(|| {
            ApiError::new(
                axum::http::StatusCode::NOT_FOUND,
                "NotFound",
                format!("no history entry {index}"),
            )
        })?;
        if entry.committed {
            return Err(ApiError::conflict("AlreadyCommitted", format!("entry {index} is already committed")));
        }
        let Outcome::Explained { hmodel, hplan, .. } = &entry.outcome else {
            return Err(ApiError::conflict("EntryFailed", format!("entry {index} produced no plan")));
        };
        if entry.based_on != self.current_model.provenance {
            return Err(ApiError::conflict(
                "StaleEntry",
                format!("entry {index} was made against an earlier iteration"),
            ));
        }
        self.current_model = hmodel.clone();
        self.current_plan = hplan.clone();
        self.history[index].committed = true;
        self.updated_at = Utc::now();
        Ok(())
    }

    pub fn history_view(&self) -> Value {
        let entries: Vec<Value> = self
            .history
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let mut v = json!({
                    "index": i,
                    "suggestion": h.suggestion,
                    "principle": h.principle,
                    "based_on": h.based_on,
                    "committed": h.committed,
                });
                let extra = match &h.outcome {
                    Outcome::Explained { explanation, .. } => json!({
                        "status": "explained",
                        "hplan": explanation.hplan,
                        "nl": explanation.nl,
                        "explanation": explanation.payload(),
                    }),
                    Outcome::Failed { code, message } => json!({
                        "status": "failed",
                        "code": code,
                        "message": message,
                    }),
                };
                v.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
                v
            })
            .collect();
        Value::Array(entries)
    }
}
