use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pcpriv_core::attacker::AttackerProfile;
use pcpriv_core::harness::{decimate, EvaluateRequest, EvaluateResponse, ExperimentState, ObjectInfo};
use pcpriv_core::Error;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

type AppState = Arc<ExperimentState>;

/// Routes of the JSON API; `ui_dir`, when given, is served under `/ui`.
pub fn router(state: AppState, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/objects", get(objects))
        .route("/object/{id}", get(object))
        .route("/evaluate", post(evaluate))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    pub message: String,
}

struct Failure(StatusCode, ApiError);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            "UnknownObject" => StatusCode::NOT_FOUND,
            "ZeroPrivilege" | "InvalidPrivilege" | "InvalidConfig" => StatusCode::BAD_REQUEST,
            "AttackerNotTrained" => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Failure(status, ApiError { error: e.kind().into(), message: e.to_string() })
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub objects: usize,
    pub attackers: Vec<AttackerProfile>,
    pub e_max: u32,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        objects: state.corpus.objects.len(),
        attackers: state.attackers.keys().copied().collect(),
        e_max: state.config.e_max,
    })
}

async fn objects(State(state): State<AppState>) -> Json<Vec<ObjectInfo>> {
    Json(state.objects())
}

#[derive(Debug, Deserialize)]
pub struct ObjectQuery {
    pub l: f64,
    #[serde(default)]
    pub seed: u64,
    pub max_points: Option<usize>,
}

/// A regeneration next to its original, both optionally decimated.
#[derive(Debug, Serialize, Deserialize)]
pub struct ObjectView {
    pub object_id: String,
    pub l: f64,
    pub epoch: u32,
    pub seed: u64,
    pub original: Vec<[f64; 3]>,
    pub points: Vec<[f64; 3]>,
}

async fn object(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ObjectQuery>,
) -> Result<Json<ObjectView>, Failure> {
    let view = blocking(move || {
        let (spec, regen) = state.regenerate(&id, q.l, q.seed)?;
        let original = state.corpus.find(&id).expect("regenerate checked the id").cloud.points().to_vec();
        let points =
            |v: Vec<pcpriv_core::geometry::Vec3>| decimate(v.into_iter().map(|p| p.to_array()).collect(), q.max_points);
        Ok(ObjectView {
            object_id: id,
            l: q.l,
            epoch: spec.epoch,
            seed: q.seed,
            original: points(original),
            points: points(regen.into_points()),
        })
    })
    .await?;
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
pub struct EvaluateQuery {
    pub max_points: Option<usize>,
}

async fn evaluate(
    State(state): State<AppState>,
    Query(q): Query<EvaluateQuery>,
    body: Result<Json<EvaluateRequest>, JsonRejection>,
) -> Result<Json<EvaluateResponse>, Failure> {
    let Json(req) = body.map_err(|e| {
        Failure(StatusCode::BAD_REQUEST, ApiError { error: "InvalidRequest".into(), message: e.body_text() })
    })?;
    let mut resp = blocking(move || state.evaluate(&req)).await?;
    resp.points = decimate(resp.points, q.max_points);
    Ok(Json(resp))
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, Failure> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(Failure::from),
        Err(e) => Err(Failure(
            StatusCode::INTERNAL_SERVER_ERROR,
            ApiError { error: "Internal".into(), message: e.to_string() },
        )),
    }
}
