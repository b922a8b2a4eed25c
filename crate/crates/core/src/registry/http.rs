//! JSON-over-HTTP front end for a [`Registry`].
//!
//! | method | path                                   | body / query                              |
//! |--------|----------------------------------------|-------------------------------------------|
//! | POST   | `/models`                              | ModelSnapshot                             |
//! | POST   | `/stress-tests`                        | `{manifest, examples}`                    |
//! | GET    | `/stress-tests/{id}`                   |                                           |
//! | POST   | `/models/{id}/evaluations/{test_id}`   | `{entries, signatures?, submitted_at?}`   |
//! | GET    | `/models/{id}/card`                    |                                           |
//! | POST   | `/models/{id}/overlap-audit`           | `{training_example_hashes}`               |
//! | GET    | `/verify`                              | `example_hash, score_hash, signature, public_key` |
//!
//! Readers identify themselves with `Authorization: Bearer <token>`; no
//! header means the public role. Errors are `{code, message}`.

use std::collections::{HashMap, HashSet};
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use super::{Reader, Registry, StressTestDoc};
use crate::crypto::{
    verify_prediction, Digest, ModelSnapshot, PublicKey, Signature, SignatureBytes,
};
use crate::error::Error;
use crate::types::{PredictionEntry, PredictionSet};

pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownModel(_) | Error::UnknownTest(_) => StatusCode::NOT_FOUND,
            Error::DuplicateModelId(_) | Error::DuplicateStressTestId(_) => StatusCode::CONFLICT,
            Error::Expired { .. } => StatusCode::GONE,
            Error::Decode(_) | Error::Json(_) => StatusCode::BAD_REQUEST,
            Error::Store(_) | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError {
            status,
            body: e.to_json(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| Error::Decode(format!("request body: {e}")).into())
}

fn reader(registry: &Registry, headers: &HeaderMap) -> Result<Reader, ApiError> {
    let token = match headers.get(header::AUTHORIZATION) {
        None => None,
        Some(v) => Some(
            v.to_str()
                .ok()
                .and_then(|s| s.strip_prefix("Bearer "))
                .map(str::trim)
                .ok_or_else(|| unauthorized("authorization header must be 'Bearer <token>'"))?,
        ),
    };
    registry
        .reader_for_token(token)
        .ok_or_else(|| unauthorized("unknown token"))
}

fn unauthorized(message: &str) -> ApiError {
    ApiError {
        status: StatusCode::UNAUTHORIZED,
        body: json!({ "code": "unauthorized", "message": message }),
    }
}

/// Runs registry work off the async executor; signature checks and key
/// derivation are CPU-bound.
async fn blocking<T, F>(registry: Arc<Registry>, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&Registry) -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&registry))
        .await
        .map_err(|e| ApiError::from(Error::Store(format!("worker failed: {e}"))))?
}

async fn register_model(State(reg): State<Arc<Registry>>, body: Bytes) -> ApiResult {
    let snapshot: ModelSnapshot = parse_body(&body)?;
    let id = blocking(reg, move |r| Ok(r.register_model(&snapshot)?)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "model_id": id }))).into_response())
}

async fn submit_stress_test(State(reg): State<Arc<Registry>>, body: Bytes) -> ApiResult {
    let doc: StressTestDoc = parse_body(&body)?;
    let test = doc.into_test()?;
    let id = blocking(reg, move |r| Ok(r.submit_stress_test(&test)?)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "stress_test_id": id }))).into_response())
}

async fn get_stress_test(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult {
    let who = reader(&reg, &headers)?;
    Ok(Json(reg.get_stress_test(&id, &who)?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluationBody {
    entries: Vec<PredictionEntry>,
    #[serde(default)]
    signatures: Option<Vec<Signature>>,
    #[serde(default)]
    submitted_at: Option<DateTime<Utc>>,
}

async fn submit_evaluation(
    State(reg): State<Arc<Registry>>,
    Path((model_id, test_id)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let body: EvaluationBody = parse_body(&body)?;
    let signatures = match body.signatures {
        Some(s) => s,
        None => body
            .entries
            .iter()
            .map(|e| {
                e.signature
                    .ok_or_else(|| Error::InvalidSignature(Some(e.example_id.clone())))
            })
            .collect::<Result<_, _>>()?,
    };
    let submitted_at = body.submitted_at.unwrap_or_else(|| reg.now());
    let preds = PredictionSet::new(&model_id, &test_id, body.entries, submitted_at)?;
    let report = blocking(reg, move |r| {
        Ok(r.submit_evaluation(&model_id, &test_id, &preds, &signatures)?)
    })
    .await?;
    Ok(Json(report).into_response())
}

async fn get_card(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult {
    let who = reader(&reg, &headers)?;
    Ok(Json(reg.get_model_card(&id, &who)?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditBody {
    training_example_hashes: Vec<Digest>,
}

async fn overlap_audit(
    State(reg): State<Arc<Registry>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let body: AuditBody = parse_body(&body)?;
    let hashes: HashSet<Digest> = body.training_example_hashes.into_iter().collect();
    let record = blocking(reg, move |r| Ok(r.post_overlap_audit(&id, &hashes)?)).await?;
    Ok(Json(record).into_response())
}

/// Stateless check of one manifest record. A malformed signature is simply
/// invalid; malformed hashes or keys are a bad request.
async fn verify(RawQuery(query): RawQuery) -> ApiResult {
    let params: HashMap<&str, &str> = query
        .as_deref()
        .unwrap_or("")
        .split('&')
        .filter_map(|kv| kv.split_once('='))
        .collect();
    let field = |name: &str| {
        params
            .get(name)
            .copied()
            .ok_or_else(|| ApiError::from(Error::Decode(format!("missing query parameter {name}"))))
    };
    let example_hash: Digest = field("example_hash")?.parse()?;
    let score_hash: Digest = field("score_hash")?.parse()?;
    let public_key: PublicKey = field("public_key")?.parse()?;
    let valid = field("signature")?
        .parse::<SignatureBytes>()
        .map(|bytes| {
            let sig = Signature {
                bytes,
                signer: public_key,
            };
            verify_prediction(&sig, &example_hash, &score_hash, &public_key)
        })
        .unwrap_or(false);
    Ok(Json(json!({ "valid": valid })).into_response())
}

pub fn router(registry: Arc<Registry>) -> Router {
    Router::new()
        .route("/models", post(register_model))
        .route("/stress-tests", post(submit_stress_test))
        .route("/stress-tests/{id}", get(get_stress_test))
        .route(
            "/models/{id}/evaluations/{test_id}",
            post(submit_evaluation),
        )
        .route("/models/{id}/card", get(get_card))
        .route("/models/{id}/overlap-audit", post(overlap_audit))
        .route("/verify", get(verify))
        .with_state(registry)
}

/// Serves until Ctrl-C.
pub async fn serve(registry: Arc<Registry>, addr: SocketAddr) -> crate::error::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(registry))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
