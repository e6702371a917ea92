//! Where policies come from: a directory of `.mrpp.json` files or a running
//! registry.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use mrpp_core::codec::POLICY_EXTENSION;
use mrpp_core::domain::is_valid_domain;
use mrpp_core::{build_graph, parse_policy, validate_policy, Policy, SharingGraph};

use crate::CliError;

/// Policies read from a directory. Files that fail to parse or validate put
/// their party in `invalid` so the graph marks it as such.
#[derive(Debug, Default)]
pub struct DirSource {
    pub policies: Vec<Policy>,
    pub invalid: BTreeSet<String>,
    /// Files skipped because no party could be determined.
    pub skipped: Vec<PathBuf>,
}

impl DirSource {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
        let mut files = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| CliError::io(dir, e))?.path();
            if path.is_file() && path.to_string_lossy().ends_with(POLICY_EXTENSION) {
                files.push(path);
            }
        }
        files.sort();
        let mut out = DirSource::default();
        for path in files {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            match parse_policy(&text) {
                Ok(policy) if validate_policy(&policy).is_valid() => out.policies.push(policy),
                Ok(policy) => {
                    out.invalid.insert(policy.party);
                }
                Err(_) => match party_from_file_name(&path) {
                    Some(party) => {
                        out.invalid.insert(party);
                    }
                    None => out.skipped.push(path),
                },
            }
        }
        Ok(out)
    }

    pub fn graph(&self) -> Result<SharingGraph, CliError> {
        build_graph(&self.policies, &self.invalid).map_err(|e| CliError::Domain(e.to_string()))
    }

    pub fn policy(&self, party: &str) -> Option<&Policy> {
        self.policies.iter().find(|p| p.party == party)
    }
}

/// `shop.example.mrpp.json` names `shop.example`.
fn party_from_file_name(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    let party = name.strip_suffix(POLICY_EXTENSION)?;
    is_valid_domain(party).then(|| party.to_string())
}

/// Blocking client for the store's HTTP interface.
pub struct Registry {
    base: String,
    agent: ureq::Agent,
}

/// A response the caller has to interpret.
pub struct Reply {
    pub status: u16,
    pub etag: Option<String>,
    pub body: String,
}

impl Registry {
    pub fn new(base: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { base: base.trim_end_matches('/').to_string(), agent }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn get(&self, path: &str, etag: Option<&str>) -> Result<Reply, CliError> {
        let url = self.url(path);
        let mut request = self.agent.get(&url);
        if let Some(tag) = etag {
            request = request.header("if-none-match", tag);
        }
        let mut response = request.call().map_err(|e| CliError::Io(format!("cannot reach {url}: {e}")))?;
        let status = response.status().as_u16();
        let etag = response.headers().get("etag").and_then(|v| v.to_str().ok()).map(str::to_string);
        let body = if status == 304 {
            String::new()
        } else {
            response
                .body_mut()
                .read_to_string()
                .map_err(|e| CliError::Io(format!("cannot read response from {url}: {e}")))?
        };
        Ok(Reply { status, etag, body })
    }

    /// GET expecting 200 with a JSON body.
    pub fn get_json(&self, path: &str) -> Result<serde_json::Value, CliError> {
        let reply = self.get(path, None)?;
        if reply.status != 200 {
            return Err(self.refusal(path, &reply));
        }
        serde_json::from_str(&reply.body)
            .map_err(|e| CliError::Io(format!("{} returned malformed JSON: {e}", self.url(path))))
    }

    pub fn graph(&self) -> Result<SharingGraph, CliError> {
        let value = self.get_json("/graph")?;
        SharingGraph::from_json(value).map_err(|e| CliError::Io(format!("{}: {e}", self.url("/graph"))))
    }

    /// Latest policy of `party` (or a given version); `None` when the
    /// registry has none.
    pub fn policy(&self, party: &str, version: Option<i64>) -> Result<Option<Policy>, CliError> {
        let path = match version {
            Some(v) => format!("/policies/{party}?version={v}"),
            None => format!("/policies/{party}"),
        };
        let reply = self.get(&path, None)?;
        match reply.status {
            200 => self.decode(&path, &reply.body).map(Some),
            404 => Ok(None),
            _ => Err(self.refusal(&path, &reply)),
        }
    }

    pub fn decode(&self, path: &str, body: &str) -> Result<Policy, CliError> {
        parse_policy(body).map_err(|e| CliError::Io(format!("{} returned an unreadable policy: {e}", self.url(path))))
    }

    /// 4xx answers are about the request's subject; anything else means the
    /// service itself is unhealthy.
    pub fn refusal(&self, path: &str, reply: &Reply) -> CliError {
        let message = serde_json::from_str::<serde_json::Value>(&reply.body)
            .ok()
            .and_then(|v| v["message"].as_str().map(str::to_string))
            .unwrap_or_else(|| reply.body.trim().to_string());
        let text = format!("{} answered {}: {message}", self.url(path), reply.status);
        if (400..500).contains(&reply.status) {
            CliError::Domain(text)
        } else {
            CliError::Io(text)
        }
    }
}
