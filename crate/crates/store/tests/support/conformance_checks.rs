//! Service conformance checks shared by the store's own tests and the
//! acceptance runner. Each returns `Err` with a description on failure.
//!
//! Re-record the exchange script after an intentional wire change with
//! `MRPP_RECORD=1 cargo test -p mrpp-store --test conformance`, then review
//! the diff of `tests/fixtures/conformance.json`.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mrpp_core::canonical::content_hash;
use mrpp_store::conformance::{load_script, record, replay, send, snapshot_dir, RecordedRequest};
use mrpp_store::{http, ServiceConfig, Store};

pub const ENDPOINTS: [&str; 13] = [
    "PUT /policies/{party}",
    "GET /policies/{party}",
    "GET /graph",
    "GET /audit/one-way",
    "GET /apps",
    "GET /apps/search",
    "GET /apps/{app_id}/badge",
    "GET /apps/{app_id}/gap",
    "GET /apps/{app_id}/exposure",
    "PUT /profiles/{profile_id}",
    "GET /profiles/{profile_id}",
    "POST /events/breach",
    "GET /alerts",
];

pub fn shared_fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

pub fn script_path() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../store/tests/fixtures/conformance.json"))
}

pub fn fresh_store(dir: &Path) -> Arc<Store> {
    std::fs::copy(shared_fixtures().join("store/catalog.json"), dir.join("catalog.json")).unwrap();
    Arc::new(Store::open(dir, ServiceConfig::default()).unwrap())
}

fn get(path: &str) -> RecordedRequest {
    RecordedRequest {
        method: "GET".into(),
        path: path.into(),
        headers: Default::default(),
        body: None,
        body_text: None,
        body_file: None,
    }
}

fn put_file(path: &str, file: &str) -> RecordedRequest {
    RecordedRequest { method: "PUT".into(), body_file: Some(file.into()), ..get(path) }
}

/// `METHOD /route/{param}` shape of a concrete request.
fn endpoint_of(method: &str, path: &str) -> String {
    let path = path.split('?').next().unwrap_or(path);
    let segments: Vec<_> = path.split('/').collect();
    let shape = match segments.as_slice() {
        ["", "policies", _] => "/policies/{party}".to_string(),
        ["", "apps", "search"] => "/apps/search".to_string(),
        ["", "apps", _, tail] => format!("/apps/{{app_id}}/{tail}"),
        ["", "profiles", _] => "/profiles/{profile_id}".to_string(),
        _ => path.to_string(),
    };
    format!("{method} {shape}")
}

/// Replay the recorded script against a fresh service; every exchange must
/// match and all endpoints must be exercised.
pub async fn recorded_exchanges_replay() -> Result<usize, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let router = http::router(fresh_store(dir.path()));
    let script = load_script(&script_path())?;
    let mismatches = replay(&router, &script, &shared_fixtures()).await;
    if let Some(first) = mismatches.first() {
        return Err(format!("{} of {} exchanges differ; first {}: {}", mismatches.len(), script.len(), first.name, first.problem));
    }
    let seen: BTreeSet<String> = script.iter().map(|e| endpoint_of(&e.request.method, &e.request.path)).collect();
    let missing: Vec<_> = ENDPOINTS.iter().filter(|e| !seen.contains(**e)).collect();
    if !missing.is_empty() {
        return Err(format!("script does not exercise {missing:?}"));
    }
    Ok(script.len())
}

/// Rewrite the script from what the service returns now.
pub async fn rerecord() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let router = http::router(fresh_store(dir.path()));
    let script = load_script(&script_path())?;
    let keep = ["etag", "location", "x-mrpp-version", "x-mrpp-received-at", "x-mrpp-validity"];
    let recorded = record(&router, &script, &shared_fixtures(), &keep).await?;
    let text = serde_json::to_string_pretty(&recorded).map_err(|e| e.to_string())? + "\n";
    std::fs::write(script_path(), text).map_err(|e| e.to_string())
}

/// Conflicting, invalid and unparseable submissions leave every stored
/// byte as it was.
pub async fn rejected_puts_leave_registry_untouched() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let router = http::router(fresh_store(dir.path()));
    let base = shared_fixtures();
    let ok = send(&router, &put_file("/policies/app.example", "chain/app.example.mrpp.json"), &base).await?;
    if ok.status != 201 {
        return Err(format!("first put answered {}: {}", ok.status, ok.body));
    }
    let before = snapshot_dir(dir.path()).map_err(|e| e.to_string())?;
    for (req, status) in [
        (put_file("/policies/app.example", "chain/app.example.mrpp.json"), 409),
        (put_file("/policies/app.example", "store/app.example-v2-invalid.mrpp.json"), 422),
        (put_file("/policies/broken.example", "invalid/truncated.mrpp.json"), 400),
        (put_file("/policies/broken.example", "invalid/undeclared-flow.mrpp.json"), 422),
    ] {
        let resp = send(&router, &req, &base).await?;
        if resp.status != status {
            return Err(format!("{} answered {}, expected {status}: {}", req.path, resp.status, resp.body));
        }
        if snapshot_dir(dir.path()).map_err(|e| e.to_string())? != before {
            return Err(format!("registry changed after a {status} rejection"));
        }
    }
    let latest = send(&router, &get("/policies/app.example"), &base).await?;
    match latest.headers.get("x-mrpp-version").map(String::as_str) {
        Some("1") => Ok(()),
        other => Err(format!("latest version after rejections is {other:?}")),
    }
}

/// Bytes fetched before a restart come back identical, with an ETag equal
/// to their SHA-256.
pub async fn restart_and_refetch() -> Result<usize, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = shared_fixtures();
    let uploads = [
        ("/policies/agg1.example", "chain/agg1.example.mrpp.json"),
        ("/policies/app.example", "chain/app.example.mrpp.json"),
        ("/policies/app.example", "store/app.example-v2.mrpp.json"),
        ("/policies/rovio-fixture.example", "angrybirds/rovio-fixture.example.mrpp.json"),
    ];
    let mut fetched = Vec::new();
    {
        let router = http::router(fresh_store(dir.path()));
        for (path, file) in uploads {
            let resp = send(&router, &put_file(path, file), &base).await?;
            if resp.status != 201 {
                return Err(format!("put {file} answered {}: {}", resp.status, resp.body));
            }
            let put: serde_json::Value = serde_json::from_str(&resp.body).map_err(|e| e.to_string())?;
            let version = put["version"].as_i64().ok_or("put response lacks version")?;
            let url = format!("{path}?version={version}");
            let got = send(&router, &get(&url), &base).await?;
            let expected_tag = format!("\"{}\"", put["hash"].as_str().unwrap_or_default());
            if got.headers.get("etag") != Some(&expected_tag) {
                return Err(format!("{url}: etag {:?} != put hash {expected_tag}", got.headers.get("etag")));
            }
            fetched.push((url, got.body, expected_tag));
        }
    }
    let router = http::router(Arc::new(Store::open(dir.path(), ServiceConfig::default()).map_err(|e| e.to_string())?));
    for (url, body, etag) in &fetched {
        let again = send(&router, &get(url), &base).await?;
        if again.status != 200 || &again.body != body {
            return Err(format!("{url}: different answer after restart ({})", again.status));
        }
        if again.headers.get("etag") != Some(etag) || &format!("\"{}\"", content_hash(again.body.as_bytes())) != etag {
            return Err(format!("{url}: etag does not match content hash after restart"));
        }
    }
    Ok(fetched.len())
}
