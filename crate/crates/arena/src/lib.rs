//! Results explorer backend: log upload, entity listing and plot data as
//! JSON or SVG over HTTP.
//!
//! Every request opens the database file afresh, so the service holds no
//! state besides that file.

pub mod plot;
pub mod svg;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use plannerbench_core::benchlog::{parse_log, LogError};
use plannerbench_db::{DbError, ResultsDb};
use serde::Serialize;
use thiserror::Error;
use tower_http::services::ServeDir;

use plot::{build_plot, PlotKind, PlotOptions, PlotQuery, ALL_VERSIONS, DEFAULT_ATTRIBUTE, DEFAULT_PROGRESS_ATTRIBUTE};

pub const DEFAULT_UPLOAD_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub db_path: PathBuf,
    /// Directory holding the UI bundle, served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Bytes.
    pub upload_limit: usize,
}

impl ServerConfig {
    pub fn new(db_path: impl Into<PathBuf>) -> Self {
        ServerConfig {
            db_path: db_path.into(),
            static_dir: None,
            upload_limit: DEFAULT_UPLOAD_LIMIT,
        }
    }
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Db(#[from] DbError),
    #[error("{0}")]
    InvalidLog(LogError),
    #[error("{message}")]
    Body { status: StatusCode, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    available: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    suggestions: Option<Vec<String>>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = ErrorBody {
            error: self.to_string(),
            line: None,
            available: None,
            suggestions: None,
        };
        let status = match &self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::InvalidLog(e) => {
                if let LogError::Syntax { line, .. } = e {
                    body.line = Some(*line);
                }
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ApiError::Body { status, .. } => *status,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ApiError::Db(e) => match e {
                DbError::UnknownProblem { available, .. } => {
                    body.available = Some(available.clone());
                    StatusCode::BAD_REQUEST
                }
                DbError::UnknownAttribute {
                    available, suggestions, ..
                }
                | DbError::UnknownPlanner {
                    available, suggestions, ..
                } => {
                    body.available = Some(available.clone());
                    body.suggestions = Some(suggestions.clone());
                    StatusCode::BAD_REQUEST
                }
                DbError::NotNumeric(_) => StatusCode::BAD_REQUEST,
                DbError::Log(_)
                | DbError::TypeClash { .. }
                | DbError::ReservedName(_)
                | DbError::DuplicateColumn { .. } => StatusCode::UNPROCESSABLE_ENTITY,
                DbError::Sql(_) | DbError::Corrupt(_) => StatusCode::INTERNAL_SERVER_ERROR,
            },
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Clone)]
struct AppState {
    config: Arc<ServerConfig>,
    upload_lock: Arc<tokio::sync::Mutex<()>>,
}

impl AppState {
    async fn with_db<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut ResultsDb) -> Result<T, ApiError> + Send + 'static,
    {
        let path = self.config.db_path.clone();
        tokio::task::spawn_blocking(move || {
            let mut db = ResultsDb::open(&path)?;
            f(&mut db)
        })
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
    }
}

pub fn router(config: ServerConfig) -> Router {
    let limit = config.upload_limit;
    let static_dir = config.static_dir.clone().filter(|d| d.is_dir());
    let state = AppState {
        config: Arc::new(config),
        upload_lock: Arc::new(tokio::sync::Mutex::new(())),
    };
    let api = Router::new()
        .route("/api/entities", get(entities))
        .route("/api/upload", post(upload).layer(DefaultBodyLimit::max(limit)))
        .route("/api/plot/performance", get(|s, q| plot(s, q, PlotKind::Performance)))
        .route("/api/plot/progress", get(|s, q| plot(s, q, PlotKind::Progress)))
        .route("/api/plot/regression", get(|s, q| plot(s, q, PlotKind::Regression)))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(index)),
    }
}

pub async fn serve(config: ServerConfig, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}

const INDEX: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>plannerbench arena</title></head>
<body>
<h1>plannerbench arena</h1>
<p>No UI bundle is installed. The API is available:</p>
<ul>
<li><a href=\"/api/entities\">GET /api/entities</a></li>
<li>POST /api/upload (log file body)</li>
<li>GET /api/plot/performance, /api/plot/progress, /api/plot/regression</li>
</ul>
</body></html>
";

async fn index() -> Html<&'static str> {
    Html(INDEX)
}

async fn entities(State(state): State<AppState>) -> Result<Response, ApiError> {
    let e = state.with_db(|db| Ok(db.list_entities()?)).await?;
    Ok(Json(e).into_response())
}

#[derive(Debug, Serialize)]
struct UploadResponse {
    experiment_id: i64,
}

async fn upload(State(state): State<AppState>, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let body = body.map_err(|r| ApiError::Body {
        status: r.status(),
        message: r.body_text(),
    })?;
    let text = String::from_utf8(body.to_vec()).map_err(|e| ApiError::Body {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        message: format!("log is not UTF-8: {e}"),
    })?;
    let log = parse_log(&text).map_err(ApiError::InvalidLog)?;
    let _guard = state.upload_lock.lock().await;
    let id = state.with_db(move |db| Ok(db.ingest_log(&log)?)).await?;
    Ok((StatusCode::OK, Json(UploadResponse { experiment_id: id })).into_response())
}

fn flag(params: &HashMap<String, String>, key: &str) -> Result<bool, ApiError> {
    match params.get(key).map(|s| s.to_ascii_lowercase()) {
        None => Ok(false),
        Some(v) if v == "true" || v == "1" => Ok(true),
        Some(v) if v == "false" || v == "0" || v.is_empty() => Ok(false),
        Some(v) => Err(ApiError::BadRequest(format!("{key} must be true or false, got {v:?}"))),
    }
}

/// Builds a query from URL parameters.
pub fn parse_plot_query(kind: PlotKind, params: &HashMap<String, String>) -> Result<(PlotQuery, bool), String> {
    let bad = |e: ApiError| e.to_string();
    let problem = params
        .get("problem")
        .filter(|p| !p.is_empty())
        .cloned()
        .ok_or("missing query parameter \"problem\"")?;
    let default_attr = if kind == PlotKind::Progress {
        DEFAULT_PROGRESS_ATTRIBUTE
    } else {
        DEFAULT_ATTRIBUTE
    };
    let attribute = params
        .get("attribute")
        .filter(|a| !a.is_empty())
        .cloned()
        .unwrap_or_else(|| default_attr.to_string());
    let version = params
        .get("version")
        .filter(|v| !v.is_empty() && v.as_str() != ALL_VERSIONS)
        .cloned();
    let planners = params.get("planners").map(|p| {
        p.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect::<Vec<_>>()
    });
    let planners = planners.filter(|p| !p.is_empty());
    let mut options = PlotOptions {
        ecdf: flag(params, "ecdf").map_err(bad)?,
        show_points: flag(params, "show_points").map_err(bad)?,
        ..PlotOptions::default()
    };
    if let Some(w) = params.get("smooth_window") {
        options.smooth_window = w
            .parse::<usize>()
            .ok()
            .filter(|w| *w >= 1)
            .ok_or_else(|| format!("smooth_window must be a positive integer, got {w:?}"))?;
    }
    if let Some(g) = params.get("grid_step") {
        options.grid_step = g
            .parse::<f64>()
            .ok()
            .filter(|g| *g > 0.0 && g.is_finite())
            .ok_or_else(|| format!("grid_step must be a positive number, got {g:?}"))?;
    }
    let svg = match params.get("format").map(String::as_str) {
        None | Some("json") => false,
        Some("svg") => true,
        Some(f) => return Err(format!("format must be json or svg, got {f:?}")),
    };
    Ok((
        PlotQuery {
            kind,
            problem,
            attribute,
            version,
            planners,
            options,
        },
        svg,
    ))
}

async fn plot(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
    kind: PlotKind,
) -> Result<Response, ApiError> {
    let (query, svg) = parse_plot_query(kind, &params).map_err(ApiError::BadRequest)?;
    let data = state.with_db(move |db| Ok(build_plot(db, &query)?)).await?;
    if svg {
        Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg::render(&data)).into_response())
    } else {
        Ok(Json(data).into_response())
    }
}
