use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use ethiplan::{CompileError, ExplainError, ParseError, PlanError};
use serde_json::{json, Value};

/// An API failure: HTTP status plus the `{code, message, detail}` body.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", format!("no session `{id}`"))
    }

    pub fn conflict(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    pub fn unprocessable(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        let pos = e.position();
        let code = if e.is_syntax() { "SyntaxError" } else { "SemanticError" };
        let origin = match &e {
            ParseError::Syntax { origin, .. } | ParseError::Semantic { origin, .. } => origin.clone(),
        };
        Self::new(StatusCode::BAD_REQUEST, code, e.to_string()).with_detail(json!({
            "origin": origin,
            "line": pos.line,
            "col": pos.col,
        }))
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::NoPlanFound => Self::unprocessable("NoPlanFound", e.to_string()),
            PlanError::BudgetExceeded { expansions } => {
                Self::unprocessable("BudgetExceeded", e.to_string()).with_detail(json!({ "expansions": expansions }))
            }
            PlanError::InvalidBudget => Self::bad_request(e.to_string()),
        }
    }
}

impl From<ExplainError> for ApiError {
    fn from(e: ExplainError) -> Self {
        let message = e.to_string();
        match e {
            ExplainError::Compile(CompileError::UnknownAction(a)) => {
                Self::new(StatusCode::BAD_REQUEST, "UnknownAction", message).with_detail(json!({ "action": a }))
            }
            ExplainError::Compile(CompileError::IdenticalActions(_)) => {
                Self::new(StatusCode::BAD_REQUEST, "BadSuggestion", message)
            }
            ExplainError::Compile(_) => Self::unprocessable("ConflictingSuggestion", message),
            ExplainError::NoPlanFound { provenance } => {
                Self::unprocessable("NoPlanFound", message).with_detail(json!({ "provenance": provenance }))
            }
            ExplainError::BudgetExceeded => Self::unprocessable("BudgetExceeded", message),
            ExplainError::ValidationFailed(v) => {
                Self::unprocessable("ValidationFailed", message).with_detail(json!({ "step": v.step }))
            }
            ExplainError::Ethics(ethiplan::EthicsError::Search(PlanError::BudgetExceeded { .. })) => {
                Self::unprocessable("BudgetExceeded", message)
            }
            ExplainError::InvalidProblem(_) | ExplainError::Ethics(_) | ExplainError::Reasons(_) => {
                Self::internal(message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "code": self.code,
            "message": self.message,
            "detail": self.detail,
        });
        (self.status, axum::Json(body)).into_response()
    }
}
