//! HTTP shell over [`SessionManager`].
//!
//! | method | path                              | body                 |
//! |--------|-----------------------------------|----------------------|
//! | POST   | `/sessions`                       | `{"patient_id"}`     |
//! | POST   | `/sessions/{id}/phases/{phase}`   | `{attribute: [tokens]}` |
//! | GET    | `/sessions/{id}/differential`     |                      |
//! | POST   | `/sessions/{id}/finalize`         |                      |
//! | GET    | `/catalog`                        |                      |

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use framedx_core::inference::{Findings, InferenceError};
use framedx_core::{DiagnosisReport, Phase};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::session::{SessionError, SessionManager};

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>, detail: Value) -> Self {
        ApiError { status, code, message: message.into(), detail }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::NotFound(id) => {
                ApiError::new(StatusCode::NOT_FOUND, "session_not_found", message, json!({ "session_id": id }))
            }
            SessionError::OutOfOrder { phase, reason } => ApiError::new(
                StatusCode::CONFLICT,
                "phase_out_of_order",
                message,
                json!({ "phase": phase, "reason": reason }),
            ),
            SessionError::Finalized(id) => {
                ApiError::new(StatusCode::CONFLICT, "session_finalized", message, json!({ "session_id": id }))
            }
            SessionError::NothingSubmitted(id) => {
                ApiError::new(StatusCode::CONFLICT, "no_phase_submitted", message, json!({ "session_id": id }))
            }
            SessionError::Input(err) => input_error(err, message),
            SessionError::Diagnosis(_) | SessionError::Store(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message, Value::Null)
            }
        }
    }
}

fn input_error(err: InferenceError, message: String) -> ApiError {
    let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
    match err {
        InferenceError::IllegalValue { attribute, value, allowed } => ApiError::new(
            unprocessable,
            "illegal_value",
            message,
            json!({ "attribute": attribute, "value": value, "allowed": allowed }),
        ),
        InferenceError::UnknownAttribute { attribute, .. } => {
            ApiError::new(unprocessable, "unknown_attribute", message, json!({ "attribute": attribute }))
        }
        InferenceError::WrongPhase { attribute, .. } => {
            ApiError::new(unprocessable, "wrong_phase", message, json!({ "attribute": attribute }))
        }
        InferenceError::TooManyValues { attribute, .. } => {
            ApiError::new(unprocessable, "too_many_values", message, json!({ "attribute": attribute }))
        }
        _ => ApiError::new(unprocessable, "invalid_findings", message, Value::Null),
    }
}

fn bad_body(rejection: JsonRejection) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, "bad_request", rejection.body_text(), Value::Null)
}

/// Reports go out as the exact bytes of [`DiagnosisReport::to_json`], the
/// same text the CLI prints.
fn report_response(report: &DiagnosisReport) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], report.to_json()).into_response()
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub patient_id: String,
}

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/phases/{phase}", post(submit_phase))
        .route("/sessions/{id}/differential", get(get_differential))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/catalog", get(catalog))
        .with_state(manager)
}

async fn create_session(
    State(manager): State<Arc<SessionManager>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(bad_body)?;
    let session = manager.create(req.patient_id);
    let body = json!({ "session_id": session.session_id, "patient_id": session.patient.patient_id });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn submit_phase(
    State(manager): State<Arc<SessionManager>>,
    Path((id, phase)): Path<(String, String)>,
    body: Result<Json<Findings>, JsonRejection>,
) -> Result<Response, ApiError> {
    let phase: Phase = phase.parse().map_err(|e: framedx_core::kb::UnknownPhase| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "unknown_phase",
            e.to_string(),
            json!({ "phase": e.0, "allowed": Phase::ALL }),
        )
    })?;
    let Json(findings) = body.map_err(bad_body)?;
    let report = manager.submit(&id, phase, findings)?;
    Ok(report_response(&report))
}

async fn get_differential(
    State(manager): State<Arc<SessionManager>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(report_response(&manager.differential(&id)?))
}

async fn finalize(State(manager): State<Arc<SessionManager>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let record = manager.finalize(&id)?;
    let body = json!({
        "record_id": record.record_id,
        "session_id": record.session_id,
        "patient_id": record.patient_id,
        "finalized_at": record.finalized_at,
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn catalog(State(manager): State<Arc<SessionManager>>) -> Json<Value> {
    Json(serde_json::to_value(&manager.kb().catalog).expect("catalog serializes"))
}
