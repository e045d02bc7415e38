use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use bnx_core::{Error as CoreError, NetworkError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// The JSON body of every error response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{} {}: {}", .status.as_u16(), .body.code, .body.message)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                detail: Value::Null,
            },
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.body.detail = detail;
        self
    }

    pub fn not_found(kind: &str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no {kind} with id {id}"))
            .with_detail(json!({ "kind": kind, "id": id }))
    }

    pub fn bad_body(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", message)
    }

    pub fn no_target(session: &str) -> Self {
        ApiError::new(StatusCode::CONFLICT, "no_target", "session has no target")
            .with_detail(json!({ "session": session }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let unprocessable = |code: &str, detail: Value| {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string()).with_detail(detail)
        };
        match &e {
            CoreError::UnknownNode(node) => unprocessable("unknown_node", json!({ "node": node })),
            CoreError::UnknownState { node, state } => {
                unprocessable("unknown_state", json!({ "node": node, "state": state }))
            }
            CoreError::TargetObserved(node) => unprocessable("target_observed", json!({ "node": node })),
            CoreError::ImpossibleEvidence => unprocessable("impossible_evidence", Value::Null),
            CoreError::ImpossibleScenario(kind) => unprocessable("impossible_evidence", json!({ "scenario": kind })),
            CoreError::TooLarge { assignments, limit } => unprocessable(
                "too_large",
                json!({ "assignments": assignments.to_string(), "limit": limit.to_string() }),
            ),
            CoreError::TooManyTrails { from, to, cap } => {
                unprocessable("too_many_trails", json!({ "from": from, "to": to, "cap": cap }))
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
        }
    }
}

impl From<NetworkError> for ApiError {
    fn from(e: NetworkError) -> Self {
        let bad =
            |code: &str, detail: Value| ApiError::new(StatusCode::BAD_REQUEST, code, e.to_string()).with_detail(detail);
        match &e {
            NetworkError::Syntax { line, column, .. } => bad("syntax_error", json!({ "line": line, "column": column })),
            NetworkError::Invalid { violations } => bad("invalid_network", json!({ "violations": violations })),
            NetworkError::Cycle { .. } => bad("invalid_network", json!({ "violations": [e.to_string()] })),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_422() {
        let e = ApiError::from(CoreError::UnknownState {
            node: "A".into(),
            state: "x".into(),
        });
        assert_eq!(e.status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(e.body.detail, json!({"node": "A", "state": "x"}));
        let e = ApiError::from(CoreError::ImpossibleEvidence);
        assert_eq!(e.body.message, "impossible evidence");
    }

    #[test]
    fn network_errors_map_to_400() {
        let e = ApiError::from(NetworkError::Cycle {
            nodes: vec!["A".into(), "B".into()],
        });
        assert_eq!(e.status, StatusCode::BAD_REQUEST);
        assert!(e.body.message.starts_with("cycle detected"));
    }
}
