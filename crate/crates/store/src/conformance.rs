//! Record and replay HTTP exchanges against the router.
//!
//! A script is a JSON array of exchanges. Request bodies are given as a
//! JSON value (`body`), raw text (`body_text`) or a file under a base
//! directory (`body_file`). Expected response bodies are JSON values compared by
//! their canonical rendering, byte for byte, except for two placeholders:
//! `{{timestamp}}` inside a string and `"{{seq}}"` standing for an integer.
//! `alert-{{seq}}` also works inside strings.

use std::collections::BTreeMap;
use std::path::Path;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use http_body_util::BodyExt;
use mrpp_core::canonical::to_canonical;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tower::ServiceExt;

pub const TIMESTAMP: &str = "{{timestamp}}";
pub const SEQ: &str = "{{seq}}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordedRequest {
    pub method: String,
    /// Path and query string.
    pub path: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordedResponse {
    pub status: u16,
    /// Headers that must be present with these values; others are ignored.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
    /// Expected JSON body; `null` means an empty body.
    pub body: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exchange {
    pub name: String,
    pub request: RecordedRequest,
    pub response: RecordedResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actual {
    pub status: u16,
    pub headers: BTreeMap<String, String>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub name: String,
    pub problem: String,
}

pub fn load_script(path: &Path) -> Result<Vec<Exchange>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn request_body(req: &RecordedRequest, base: &Path) -> Result<String, String> {
    match (&req.body, &req.body_text, &req.body_file) {
        (Some(v), None, None) => Ok(to_canonical(v)),
        (None, Some(t), None) => Ok(t.clone()),
        (None, None, Some(f)) => std::fs::read_to_string(base.join(f)).map_err(|e| format!("{f}: {e}")),
        (None, None, None) => Ok(String::new()),
        _ => Err("give at most one of body, body_text, body_file".into()),
    }
}

/// Send one recorded request through the router.
pub async fn send(router: &Router, req: &RecordedRequest, base: &Path) -> Result<Actual, String> {
    let mut builder = Request::builder().method(req.method.as_str()).uri(req.path.as_str());
    for (k, v) in &req.headers {
        builder = builder.header(k, v);
    }
    let request = builder.body(Body::from(request_body(req, base)?)).map_err(|e| e.to_string())?;
    let response = router.clone().oneshot(request).await.map_err(|e| e.to_string())?;
    let status = response.status().as_u16();
    let headers = response
        .headers()
        .iter()
        .map(|(k, v)| (k.as_str().to_string(), v.to_str().unwrap_or_default().to_string()))
        .collect();
    let bytes = response.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes();
    let body = String::from_utf8(bytes.to_vec()).map_err(|_| "response body is not UTF-8".to_string())?;
    Ok(Actual { status, headers, body })
}

fn is_timestamp_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, ':' | '.' | '+' | '-')
}

/// Does `actual` equal `expected` once placeholders are expanded?
pub fn matches_pattern(expected: &str, actual: &str) -> bool {
    let quoted_seq = format!("\"{SEQ}\"");
    let mut rest_e = expected;
    let mut rest_a = actual;
    loop {
        let next = [(TIMESTAMP, rest_e.find(TIMESTAMP)), (quoted_seq.as_str(), rest_e.find(&quoted_seq)), (SEQ, rest_e.find(SEQ))]
            .into_iter()
            .filter_map(|(p, i)| i.map(|i| (i, p)))
            .min_by_key(|(i, p)| (*i, std::cmp::Reverse(p.len())));
        let Some((at, placeholder)) = next else {
            return rest_e == rest_a;
        };
        let (literal, after) = rest_e.split_at(at);
        let Some(tail) = rest_a.strip_prefix(literal) else { return false };
        let class: fn(char) -> bool = if placeholder == TIMESTAMP { is_timestamp_char } else { |c| c.is_ascii_digit() };
        let taken = tail.find(|c: char| !class(c)).unwrap_or(tail.len());
        if taken == 0 {
            return false;
        }
        rest_a = &tail[taken..];
        rest_e = &after[placeholder.len()..];
    }
}

/// Compare one response with its expectation.
pub fn check(expected: &RecordedResponse, actual: &Actual) -> Result<(), String> {
    if expected.status != actual.status {
        return Err(format!("status {} != expected {}; body {}", actual.status, expected.status, actual.body));
    }
    for (name, value) in &expected.headers {
        match actual.headers.get(&name.to_ascii_lowercase()) {
            Some(v) if matches_pattern(value, v) => {}
            other => return Err(format!("header {name}: {other:?} != expected {value:?}")),
        }
    }
    let want = if expected.body.is_null() { String::new() } else { to_canonical(&expected.body) };
    if !matches_pattern(&want, &actual.body) {
        return Err(format!("body mismatch\n  expected: {}\n  actual:   {}", want.trim_end(), actual.body.trim_end()));
    }
    Ok(())
}

/// Run the script in order and report every exchange that differs.
pub async fn replay(router: &Router, script: &[Exchange], base: &Path) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for ex in script {
        let result = match send(router, &ex.request, base).await {
            Ok(actual) => check(&ex.response, &actual),
            Err(e) => Err(e),
        };
        if let Err(problem) = result {
            out.push(Mismatch { name: ex.name.clone(), problem });
        }
    }
    out
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot_dir(dir: &Path) -> std::io::Result<BTreeMap<std::path::PathBuf, Vec<u8>>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<std::path::PathBuf, Vec<u8>>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_path_buf();
                out.insert(rel, std::fs::read(&path)?);
            }
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out)?;
    Ok(out)
}

/// Replace volatile fields of a live response with placeholders.
pub fn redact(mut value: Value) -> Value {
    fn walk(v: &mut Value) {
        match v {
            Value::Object(map) => {
                for (k, child) in map.iter_mut() {
                    match (k.as_str(), &*child) {
                        ("received_at", Value::String(_)) => *child = Value::String(TIMESTAMP.into()),
                        ("created_seq" | "cursor", Value::Number(_)) => *child = Value::String(SEQ.into()),
                        ("alert_id", Value::String(_)) => *child = Value::String(format!("alert-{SEQ}")),
                        _ => walk(child),
                    }
                }
            }
            Value::Array(items) => items.iter_mut().for_each(walk),
            _ => {}
        }
    }
    walk(&mut value);
    value
}

/// Run the requests of `script` and fill in their responses from what the
/// service actually returns. `keep_headers` lists the response headers to
/// record.
pub async fn record(router: &Router, script: &[Exchange], base: &Path, keep_headers: &[&str]) -> Result<Vec<Exchange>, String> {
    let mut out = Vec::new();
    for ex in script {
        let actual = send(router, &ex.request, base).await?;
        let body = if actual.body.is_empty() {
            Value::Null
        } else {
            redact(serde_json::from_str(&actual.body).map_err(|e| format!("{}: {e}", ex.name))?)
        };
        let headers = actual
            .headers
            .iter()
            .filter(|(k, _)| keep_headers.contains(&k.as_str()))
            .map(|(k, v)| {
                let v = if k == crate::http::RECEIVED_HEADER { TIMESTAMP.to_string() } else { v.clone() };
                (k.clone(), v)
            })
            .collect();
        out.push(Exchange {
            name: ex.name.clone(),
            request: ex.request.clone(),
            response: RecordedResponse { status: actual.status, headers, body },
        });
    }
    Ok(out)
}
