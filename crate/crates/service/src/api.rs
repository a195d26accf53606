use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use ccmf_core::assessment::Rating;
use ccmf_core::catalog::{builtin_catalog, Catalog};
use ccmf_core::reporting::{chart_data, export, gap_analysis, ExportFormat};
use ccmf_core::scoring::WeightProfile;
use ccmf_core::{
    score_assessment, Assessment, RatingValue, ScoreOptions, ScoreReport, Store, TierLevel,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::problem::Problem;

/// Shared handler state: the store plus one lock per assessment id.
#[derive(Clone)]
pub struct AppState {
    store: Store,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        AppState {
            store,
            locks: Arc::default(),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock map poisoned");
        locks.entry(id.to_owned()).or_default().clone()
    }
}

pub fn api_router(state: AppState) -> Router {
    Router::new()
        .route("/api/catalogs", get(list_catalogs))
        .route("/api/catalogs/{id}", get(get_catalog))
        .route(
            "/api/assessments",
            get(list_assessments).post(create_assessment),
        )
        .route(
            "/api/assessments/{id}",
            get(get_assessment).delete(delete_assessment),
        )
        .route(
            "/api/assessments/{id}/domains/{domain}/target-tier",
            put(set_target_tier),
        )
        .route(
            "/api/assessments/{id}/domains/{domain}/ratings/{practice}",
            put(rate_practice),
        )
        .route(
            "/api/assessments/{id}/domains/{domain}/evaluations/{metric}",
            put(evaluate_metric),
        )
        .route("/api/assessments/{id}/weights", put(set_weights))
        .route("/api/assessments/{id}/completeness", get(completeness))
        .route("/api/assessments/{id}/score", post(score))
        .route("/api/assessments/{id}/report", get(report))
        .route("/api/assessments/{id}/gaps", get(gaps))
        .route("/api/assessments/{id}/charts", get(charts))
        .with_state(state)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, Problem> {
    serde_json::from_slice(body)
        .map_err(|e| Problem::bad_request(format!("invalid request body: {e}")))
}

fn etag(assessment: &Assessment) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{}\"", assessment.entity_version)).expect("ascii etag")
}

fn with_etag(assessment: &Assessment, status: StatusCode) -> Response {
    let tag = etag(assessment);
    let mut response = (status, Json(assessment)).into_response();
    response.headers_mut().insert(header::ETAG, tag);
    response
}

/// Accepts `"3"`, `3`, `W/"3"` or `*`.
fn check_if_match(headers: &HeaderMap, current: u64) -> Result<(), Problem> {
    let Some(value) = headers.get(header::IF_MATCH) else {
        return Ok(());
    };
    let text = value
        .to_str()
        .map_err(|_| Problem::bad_request("If-Match is not ASCII"))?
        .trim();
    if text == "*" {
        return Ok(());
    }
    let matched = text.split(',').any(|tag| {
        let tag = tag.trim().trim_start_matches("W/").trim_matches('"');
        tag.parse::<u64>().is_ok_and(|v| v == current)
    });
    if matched {
        Ok(())
    } else {
        Err(Problem::new(
            StatusCode::PRECONDITION_FAILED,
            "VersionMismatch",
            format!("entity version is {current}, If-Match was {text}"),
        )
        .with_details(serde_json::json!({ "entity_version": current })))
    }
}

async fn list_catalogs(State(state): State<AppState>) -> Result<Response, Problem> {
    Ok(Json(state.store.list_catalogs()?).into_response())
}

#[derive(Debug, Deserialize)]
struct CatalogQuery {
    version: Option<String>,
}

async fn get_catalog(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<CatalogQuery>,
) -> Result<Response, Problem> {
    let version = match query.version {
        Some(v) => v,
        None => state
            .store
            .list_catalogs()?
            .into_iter()
            .filter(|c| c.catalog_id == id)
            .map(|c| c.version)
            .next_back()
            .ok_or_else(|| {
                Problem::new(
                    StatusCode::NOT_FOUND,
                    "NotFound",
                    format!("catalog `{id}` not found"),
                )
            })?,
    };
    Ok(Json(state.store.load_catalog(&id, &version)?).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    organisation: String,
    #[serde(default)]
    electives: Vec<String>,
    catalog_id: Option<String>,
    catalog_version: Option<String>,
}

async fn create_assessment(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<Response, Problem> {
    let request: CreateRequest = parse_body(&body)?;
    let catalog = match (request.catalog_id, request.catalog_version) {
        (None, None) => builtin_catalog(),
        (Some(id), Some(version)) => state.store.load_catalog(&id, &version)?,
        _ => {
            return Err(Problem::bad_request(
                "catalog_id and catalog_version must be given together",
            ))
        }
    };
    let mut assessment = Assessment::create(&request.organisation, &catalog, &request.electives)?;
    let lock = state.lock_for(&assessment.assessment_id);
    let _guard = lock.lock().await;
    state.store.save_assessment(&mut assessment)?;
    let mut response = with_etag(&assessment, StatusCode::CREATED);
    let location = format!("/api/assessments/{}", assessment.assessment_id);
    response.headers_mut().insert(
        header::LOCATION,
        HeaderValue::from_str(&location).expect("ascii location"),
    );
    Ok(response)
}

async fn list_assessments(State(state): State<AppState>) -> Result<Response, Problem> {
    Ok(Json(state.store.list_assessments()?).into_response())
}

async fn get_assessment(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, Problem> {
    let assessment = state.store.load_assessment(&id)?;
    Ok(with_etag(&assessment, StatusCode::OK))
}

async fn delete_assessment(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, Problem> {
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let current = state.store.load_assessment(&id)?;
    check_if_match(&headers, current.entity_version)?;
    state.store.delete_assessment(&id)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

/// Load, mutate and persist one assessment under its lock.
async fn mutate<F>(
    state: &AppState,
    id: &str,
    headers: &HeaderMap,
    apply: F,
) -> Result<Response, Problem>
where
    F: FnOnce(&mut Assessment, &Catalog) -> Result<(), Problem>,
{
    let lock = state.lock_for(id);
    let _guard = lock.lock().await;
    let (mut assessment, catalog) = state.store.load_assessment_with_catalog(id)?;
    check_if_match(headers, assessment.entity_version)?;
    apply(&mut assessment, &catalog)?;
    state.store.save_assessment(&mut assessment)?;
    Ok(with_etag(&assessment, StatusCode::OK))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TierRequest {
    target_tier: TierLevel,
}

async fn set_target_tier(
    State(state): State<AppState>,
    Path((id, domain)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, Problem> {
    let request: TierRequest = parse_body(&body)?;
    mutate(&state, &id, &headers, |a, catalog| {
        a.set_target_tier(catalog, &domain, request.target_tier)?;
        Ok(())
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingRequest {
    value: u8,
    note: Option<String>,
}

async fn rate_practice(
    State(state): State<AppState>,
    Path((id, domain, practice)): Path<(String, String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, Problem> {
    let request: RatingRequest = parse_body(&body)?;
    let value = RatingValue::try_from(request.value)?;
    mutate(&state, &id, &headers, |a, catalog| {
        let rating = Rating {
            value,
            note: request.note,
        };
        a.rate_practice(catalog, &domain, &practice, rating)?;
        Ok(())
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluationRequest {
    value: Option<f64>,
    points: Option<u8>,
    note: Option<String>,
}

async fn evaluate_metric(
    State(state): State<AppState>,
    Path((id, domain, metric)): Path<(String, String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, Problem> {
    let request: EvaluationRequest = parse_body(&body)?;
    mutate(&state, &id, &headers, |a, catalog| {
        match (request.value, request.points) {
            (Some(value), None) => {
                a.evaluate_quantitative(catalog, &domain, &metric, value, request.note)?;
            }
            (None, Some(points)) => {
                a.evaluate_qualitative(catalog, &domain, &metric, points, request.note)?;
            }
            _ => {
                return Err(Problem::bad_request(
                    "give exactly one of `value` or `points`",
                ))
            }
        }
        Ok(())
    })
    .await
}

async fn set_weights(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, Problem> {
    let profile: Option<WeightProfile> = parse_body(&body)?;
    mutate(&state, &id, &headers, |a, _| {
        a.set_weight_profile(profile)?;
        Ok(())
    })
    .await
}

async fn completeness(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, Problem> {
    let (assessment, catalog) = state.store.load_assessment_with_catalog(&id)?;
    Ok(Json(assessment.completeness(&catalog)?).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ScoreQuery {
    #[serde(default)]
    missing_as_zero: bool,
    format: Option<String>,
}

fn load_and_score(
    state: &AppState,
    id: &str,
    query: &ScoreQuery,
) -> Result<(Assessment, Catalog, ScoreReport), Problem> {
    let (assessment, catalog) = state.store.load_assessment_with_catalog(id)?;
    let options = ScoreOptions {
        missing_as_zero: query.missing_as_zero,
    };
    let report = score_assessment(&assessment, &catalog, options)?;
    Ok((assessment, catalog, report))
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn score(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<ScoreQuery>,
) -> Result<Response, Problem> {
    let (_, _, report) = load_and_score(&state, &id, &query)?;
    Ok(json_bytes(report.to_canonical_json()))
}

async fn report(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<ScoreQuery>,
) -> Result<Response, Problem> {
    let format: ExportFormat = query.format.as_deref().unwrap_or("json").parse()?;
    let (assessment, catalog, report) = load_and_score(&state, &id, &query)?;
    let gaps = gap_analysis(&assessment, &catalog, &report)?;
    let bytes = export(&report, &gaps, format)?;
    Ok(match format {
        ExportFormat::Json => json_bytes(bytes),
        ExportFormat::Csv => {
            ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], bytes).into_response()
        }
    })
}

async fn gaps(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<ScoreQuery>,
) -> Result<Response, Problem> {
    let (assessment, catalog, report) = load_and_score(&state, &id, &query)?;
    Ok(Json(gap_analysis(&assessment, &catalog, &report)?).into_response())
}

async fn charts(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<ScoreQuery>,
) -> Result<Response, Problem> {
    let (_, _, report) = load_and_score(&state, &id, &query)?;
    Ok(Json(chart_data(&report)).into_response())
}
