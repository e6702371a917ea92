//! HTTP routes. Every JSON body, including errors, is canonical JSON.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use mrpp_core::canonical::to_canonical;
use mrpp_core::{BadgeLevel, BreachEvent, PreferenceProfile};
use serde::Serialize;
use serde_json::json;

use crate::error::StoreError;
use crate::search::SearchQuery;
use crate::store::Store;

pub const VERSION_HEADER: &str = "x-mrpp-version";
pub const RECEIVED_HEADER: &str = "x-mrpp-received-at";
pub const VALIDITY_HEADER: &str = "x-mrpp-validity";

type Shared = State<Arc<Store>>;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/policies/{party}", put(put_policy).get(fetch_policy))
        .route("/graph", get(graph))
        .route("/audit/one-way", get(audit))
        .route("/apps", get(search))
        .route("/apps/search", get(personalized_search))
        .route("/apps/{app_id}/badge", get(app_badge))
        .route("/apps/{app_id}/gap", get(app_gap))
        .route("/apps/{app_id}/exposure", get(exposure))
        .route("/profiles/{profile_id}", put(put_profile).get(get_profile))
        .route("/events/breach", post(report_breach))
        .route("/alerts", get(poll_alerts))
        .fallback(no_route)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(store)
}

fn canonical_json<T: Serialize + ?Sized>(status: StatusCode, value: &T) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], to_canonical(value)).into_response()
}

fn ok<T: Serialize + ?Sized>(value: &T) -> Response {
    canonical_json(StatusCode::OK, value)
}

impl IntoResponse for StoreError {
    fn into_response(self) -> Response {
        if matches!(self, StoreError::Io(_) | StoreError::Corrupt(_)) {
            tracing::error!(error = %self, "request failed");
        }
        let status = StatusCode::from_u16(self.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        canonical_json(status, &self.to_json())
    }
}

fn route_error(status: StatusCode, code: &str, message: &str) -> Response {
    canonical_json(status, &json!({ "code": code, "message": message, "details": {} }))
}

async fn no_route() -> Response {
    route_error(StatusCode::NOT_FOUND, "no-route", "no such endpoint")
}

async fn method_not_allowed() -> Response {
    route_error(StatusCode::METHOD_NOT_ALLOWED, "method-not-allowed", "method not allowed on this endpoint")
}

fn query_pairs(raw: &Option<String>) -> Vec<(String, String)> {
    raw.as_deref()
        .map(|q| url::form_urlencoded::parse(q.as_bytes()).into_owned().collect())
        .unwrap_or_default()
}

/// The single value of `name`, rejecting unknown or repeated parameters.
fn single_params<'a>(pairs: &'a [(String, String)], allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>, StoreError> {
    let mut seen = Vec::new();
    for (k, v) in pairs {
        if !allowed.contains(&k.as_str()) {
            return Err(StoreError::BadRequest(format!("unknown query parameter {k:?}")));
        }
        if seen.iter().any(|(s, _)| s == k) {
            return Err(StoreError::BadRequest(format!("query parameter {k:?} given more than once")));
        }
        seen.push((k.as_str(), v.as_str()));
    }
    Ok(seen)
}

fn lookup<'a>(params: &[(&'a str, &'a str)], name: &str) -> Option<&'a str> {
    params.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
}

fn required<'a>(params: &[(&'a str, &'a str)], name: &str) -> Result<&'a str, StoreError> {
    lookup(params, name).ok_or_else(|| StoreError::BadRequest(format!("missing query parameter {name:?}")))
}

fn utf8(body: &Bytes) -> Result<&str, StoreError> {
    std::str::from_utf8(body).map_err(|_| StoreError::BadRequest("request body is not UTF-8".into()))
}

async fn put_policy(State(store): Shared, Path(party): Path<String>, body: Bytes) -> Result<Response, StoreError> {
    let outcome = store.put_policy(&party, utf8(&body)?)?;
    let mut resp = canonical_json(StatusCode::CREATED, &outcome);
    let location = format!("/policies/{party}?version={}", outcome.version);
    if let Ok(v) = HeaderValue::from_str(&location) {
        resp.headers_mut().insert(header::LOCATION, v);
    }
    Ok(resp)
}

fn etag_matches(headers: &HeaderMap, hash: &str) -> bool {
    let Some(value) = headers.get(header::IF_NONE_MATCH).and_then(|v| v.to_str().ok()) else {
        return false;
    };
    value.split(',').map(str::trim).any(|tag| {
        let tag = tag.strip_prefix("W/").unwrap_or(tag);
        tag == "*" || tag.trim_matches('"') == hash
    })
}

async fn fetch_policy(
    State(store): Shared,
    Path(party): Path<String>,
    RawQuery(raw): RawQuery,
    headers: HeaderMap,
) -> Result<Response, StoreError> {
    let pairs = query_pairs(&raw);
    let params = single_params(&pairs, &["version"])?;
    let version = match lookup(&params, "version") {
        Some(v) => Some(v.parse::<i64>().map_err(|_| StoreError::BadRequest(format!("version {v:?} is not an integer")))?),
        None => None,
    };
    let stored = store.fetch_policy(&party, version)?;
    let etag = format!("\"{}\"", stored.hash);
    let mut resp = if etag_matches(&headers, &stored.hash) {
        StatusCode::NOT_MODIFIED.into_response()
    } else {
        (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], stored.bytes).into_response()
    };
    let h = resp.headers_mut();
    for (name, value) in [
        (header::ETAG.as_str(), etag),
        (VERSION_HEADER, stored.version.to_string()),
        (RECEIVED_HEADER, stored.received_at),
        (VALIDITY_HEADER, "valid".to_string()),
    ] {
        if let Ok(v) = HeaderValue::from_str(&value) {
            h.insert(header::HeaderName::from_static(name), v);
        }
    }
    Ok(resp)
}

async fn graph(State(store): Shared) -> Response {
    (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], store.graph().to_canonical()).into_response()
}

async fn audit(State(store): Shared) -> Response {
    ok(&store.audit())
}

fn search_query(raw: &Option<String>) -> Result<SearchQuery, StoreError> {
    let pairs = query_pairs(raw);
    SearchQuery::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
}

async fn search(State(store): Shared, RawQuery(raw): RawQuery) -> Result<Response, StoreError> {
    let query = search_query(&raw)?;
    if query.profile.is_some() {
        return Err(StoreError::BadRequest("use /apps/search for personalized search".into()));
    }
    Ok(ok(&json!({ "results": store.search_apps(&query) })))
}

async fn personalized_search(State(store): Shared, RawQuery(raw): RawQuery) -> Result<Response, StoreError> {
    let query = search_query(&raw)?;
    let profile = query.profile.clone().ok_or_else(|| StoreError::BadRequest("missing query parameter \"profile\"".into()))?;
    Ok(ok(&json!({ "profile_id": profile, "results": store.personalized_search(&profile, &query)? })))
}

async fn app_badge(State(store): Shared, Path(app_id): Path<String>) -> Result<Response, StoreError> {
    Ok(ok(&store.app_badge(&app_id)?))
}

async fn app_gap(State(store): Shared, Path(app_id): Path<String>, RawQuery(raw): RawQuery) -> Result<Response, StoreError> {
    let pairs = query_pairs(&raw);
    let params = single_params(&pairs, &["target"])?;
    let target: BadgeLevel = required(&params, "target")?
        .parse()
        .map_err(|e| StoreError::BadRequest(format!("target: {e}")))?;
    if target == BadgeLevel::None {
        return Err(StoreError::BadRequest("target must be bronze, gold or platinum".into()));
    }
    Ok(ok(&store.app_gap(&app_id, target)?))
}

async fn exposure(State(store): Shared, Path(app_id): Path<String>, RawQuery(raw): RawQuery) -> Result<Response, StoreError> {
    let pairs = query_pairs(&raw);
    let params = single_params(&pairs, &["party"])?;
    Ok(ok(&store.exposure(&app_id, required(&params, "party")?)?))
}

async fn put_profile(State(store): Shared, Path(profile_id): Path<String>, body: Bytes) -> Result<Response, StoreError> {
    let profile = PreferenceProfile::from_json_str(utf8(&body)?)?;
    let created = store.put_profile(&profile_id, profile)?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok(canonical_json(status, &store.profile(&profile_id)?.to_json()))
}

async fn get_profile(State(store): Shared, Path(profile_id): Path<String>) -> Result<Response, StoreError> {
    Ok(ok(&store.profile(&profile_id)?.to_json()))
}

async fn report_breach(State(store): Shared, body: Bytes) -> Result<Response, StoreError> {
    let event: BreachEvent =
        serde_json::from_str(utf8(&body)?).map_err(|e| StoreError::InvalidEvent(e.to_string()))?;
    let count = store.report_breach(&event)?;
    Ok(ok(&json!({ "party": event.party, "alerts_generated": count })))
}

async fn poll_alerts(State(store): Shared, RawQuery(raw): RawQuery) -> Result<Response, StoreError> {
    let pairs = query_pairs(&raw);
    let params = single_params(&pairs, &["profile", "since"])?;
    let since = match lookup(&params, "since") {
        Some(s) => s.parse::<u64>().map_err(|_| StoreError::BadRequest(format!("since {s:?} is not a sequence number")))?,
        None => 0,
    };
    Ok(ok(&store.poll_alerts(required(&params, "profile")?, since)?))
}
