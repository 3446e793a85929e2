//! JSON-over-HTTP front end.
//!
//! | method | path           | body / query                                  |
//! |--------|----------------|-----------------------------------------------|
//! | POST   | `/api/routes`  | [`QueryRequest`] -> [`QueryResult`]           |
//! | POST   | `/api/ratings` | [`RatingRequest`] -> [`RatingReceipt`]        |
//! | GET    | `/api/stats`   | `?city=&residents=&category=` -> aggregate    |
//! | GET    | `/healthz`     | `ok`                                          |
//!
//! Errors come back as `{"error": "...", "code": "..."}`.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use altroute_core::study::{AggregateRow, CohortFilter, LengthCategory};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::error::ServiceError;
use crate::service::{QueryRequest, QueryResult, RatingReceipt, RatingRequest, RouteService};

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self(e)
    }
}

pub fn status_of(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::OutOfArea(_)
        | ServiceError::SameVertex
        | ServiceError::IncompleteRating(_) => StatusCode::UNPROCESSABLE_ENTITY,
        ServiceError::NoRoute | ServiceError::UnknownQuery(_) | ServiceError::EmptyCohort => {
            StatusCode::NOT_FOUND
        }
        ServiceError::Expired(_) => StatusCode::GONE,
        ServiceError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
        ServiceError::Config(_)
        | ServiceError::Store(_)
        | ServiceError::Io(_)
        | ServiceError::Core(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        let body = json!({ "error": self.0.to_string(), "code": self.0.code() });
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<RouteService>;

async fn routes(
    State(svc): State<Shared>,
    Json(req): Json<QueryRequest>,
) -> Result<Json<QueryResult>, ApiError> {
    let result = tokio::task::spawn_blocking(move || svc.handle_query(&req))
        .await
        .map_err(|e| ServiceError::InvalidRequest(format!("query aborted: {e}")))??;
    Ok(Json(result))
}

async fn ratings(
    State(svc): State<Shared>,
    Json(req): Json<RatingRequest>,
) -> Result<Json<RatingReceipt>, ApiError> {
    let record = tokio::task::spawn_blocking(move || svc.record_rating(&req))
        .await
        .map_err(|e| ServiceError::InvalidRequest(format!("rating aborted: {e}")))??;
    Ok(Json(RatingReceipt {
        query_id: record.query_id,
        response_id: record.response_id,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub struct StatsParams {
    #[serde(default)]
    pub city: Option<String>,
    #[serde(default)]
    pub residents: Option<bool>,
    #[serde(default)]
    pub category: Option<LengthCategory>,
}

async fn stats(
    State(svc): State<Shared>,
    Query(p): Query<StatsParams>,
) -> Result<Json<AggregateRow>, ApiError> {
    let filter = CohortFilter {
        city: p.city.filter(|c| !c.is_empty()),
        resident: p.residents,
        category: p.category,
    };
    Ok(Json(svc.stats(&filter)?))
}

async fn healthz() -> &'static str {
    "ok"
}

/// API routes, plus static files from `static_dir` for everything else.
pub fn router(service: Shared, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/routes", post(routes))
        .route("/api/ratings", post(ratings))
        .route("/api/stats", get(stats))
        .route("/healthz", get(healthz))
        .with_state(service);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `listen` and serves until ctrl-c. Expired queries are compacted
/// away hourly.
pub async fn serve(
    service: Shared,
    listen: &str,
    static_dir: Option<&Path>,
) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let compactor = Arc::clone(&service);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(3600));
        tick.tick().await;
        loop {
            tick.tick().await;
            let svc = Arc::clone(&compactor);
            match tokio::task::spawn_blocking(move || svc.compact()).await {
                Ok(Err(e)) => tracing::warn!(error = %e, "compaction failed"),
                Err(e) => tracing::warn!(error = %e, "compaction aborted"),
                Ok(Ok(())) => {}
            }
        }
    });
    axum::serve(listener, router(service, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
