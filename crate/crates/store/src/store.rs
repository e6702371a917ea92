//! The registry, catalog, profiles and alert feed behind one lock.
//!
//! Readers share the lock; every write takes it exclusively, persists to
//! disk, then updates memory, so a reader sees either the state before a
//! write or after it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use chrono::{SecondsFormat, Utc};
use mrpp_core::alert::{alerts_from_update_with, AlertKind};
use mrpp_core::badge::PUBLISH_ACTION;
use mrpp_core::canonical::content_hash;
use mrpp_core::graph::{shortest_path, AuditReport};
use mrpp_core::validate::Finding;
use mrpp_core::{
    audit_references, badge_gap_report, build_graph, compute_badge, parse_policy, serialize_canonical, validate_policy,
    Alert, AlertBody, AppRecord, BadgeLevel, BreachEvent, GapReport, Policy, PreferenceProfile, RatingContext,
    SharingGraph,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ServiceConfig;
use crate::error::StoreError;
use crate::persist::{self, read_optional, write_atomic, write_json};
use crate::search::{passes, query_terms, rank, relevance, SearchQuery, SearchResult};

/// One accepted policy version, exactly as stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredVersion {
    pub party: String,
    pub version: i64,
    /// Canonical document bytes.
    pub bytes: String,
    pub hash: String,
    pub received_at: String,
    pub warnings: Vec<Finding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PutOutcome {
    pub party: String,
    pub version: i64,
    pub hash: String,
    pub warnings: Vec<Finding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppBadge {
    pub app_id: String,
    pub party: String,
    pub badge: BadgeLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exposure {
    pub app_id: String,
    pub party: String,
    pub path: Vec<String>,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlertPage {
    pub alerts: Vec<Alert>,
    pub cursor: u64,
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    version: i64,
    hash: String,
    received_at: String,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    party: String,
    versions: Vec<IndexEntry>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Feed {
    last_seq: u64,
    advisories: BTreeSet<String>,
    alerts: Vec<Alert>,
    /// `(advisory party, profile, app)` triples already alerted.
    issued: BTreeSet<(String, String, String)>,
}

impl Feed {
    fn push(&mut self, body: AlertBody) {
        self.last_seq += 1;
        self.alerts.push(body.issue(self.last_seq));
    }
}

#[derive(Default)]
struct State {
    registry: BTreeMap<String, Vec<StoredVersion>>,
    latest: BTreeMap<String, Policy>,
    graph: SharingGraph,
    catalog: BTreeMap<String, AppRecord>,
    profiles: BTreeMap<String, PreferenceProfile>,
    feed: Feed,
}

impl State {
    fn rebuild_graph(&mut self) {
        // Every stored policy is valid and unique per party, so this cannot
        // fail.
        self.graph = build_graph(self.latest.values(), &BTreeSet::new()).expect("registry holds one policy per party");
    }

    fn app(&self, app_id: &str) -> Result<&AppRecord, StoreError> {
        self.catalog.get(app_id).ok_or_else(|| StoreError::UnknownApp(app_id.to_string()))
    }

    fn profile(&self, profile_id: &str) -> Result<&PreferenceProfile, StoreError> {
        self.profiles.get(profile_id).ok_or_else(|| StoreError::UnknownProfile(profile_id.to_string()))
    }

    fn badge(&self, party: &str) -> BadgeLevel {
        compute_badge(&self.graph, party).unwrap_or(BadgeLevel::None)
    }

    /// Blacklist alerts for honoring profiles whose installed apps reach
    /// any of `parties`, skipping triples already alerted.
    fn advisory_alerts<'a>(&self, feed: &mut Feed, parties: impl IntoIterator<Item = &'a String>) -> usize {
        let mut count = 0;
        for party in parties {
            for profile in self.profiles.values().filter(|p| p.honor_advisories) {
                for app in profile.installed_apps.iter().filter_map(|id| self.catalog.get(id)) {
                    let triple = (party.clone(), profile.profile_id.clone(), app.app_id.clone());
                    if feed.issued.contains(&triple) || !self.graph.contains(&app.party) {
                        continue;
                    }
                    let Ok(Some(path)) = shortest_path(&self.graph, &app.party, party) else {
                        continue;
                    };
                    feed.push(AlertBody {
                        profile_id: profile.profile_id.clone(),
                        app_id: app.app_id.clone(),
                        kind: AlertKind::BlacklistReachable { party: party.clone(), distance: path.len() - 1, path },
                    });
                    feed.issued.insert(triple);
                    count += 1;
                }
            }
        }
        count
    }
}

pub struct Store {
    root: PathBuf,
    config: ServiceConfig,
    state: RwLock<State>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn corrupt(path: &Path, what: impl std::fmt::Display) -> StoreError {
    StoreError::Corrupt(format!("{}: {what}", path.display()))
}

fn check_app(app: &AppRecord) -> Result<(), StoreError> {
    if !mrpp_core::domain::is_valid_app_id(&app.app_id) {
        return Err(StoreError::InvalidApp(format!("app_id {:?} is malformed", app.app_id)));
    }
    if !mrpp_core::domain::is_valid_domain(&app.party) {
        return Err(StoreError::InvalidApp(format!("party {:?} of {} is not a lowercase DNS name", app.party, app.app_id)));
    }
    Ok(())
}

impl Store {
    /// Open (creating if needed) the data directory and load everything in
    /// it, verifying each stored policy against its recorded hash.
    pub fn open(root: impl Into<PathBuf>, config: ServiceConfig) -> Result<Self, StoreError> {
        config.check().map_err(StoreError::BadRequest)?;
        let root = root.into();
        std::fs::create_dir_all(root.join(persist::POLICIES_DIR))?;
        let mut state = State::default();

        for entry in std::fs::read_dir(root.join(persist::POLICIES_DIR))? {
            let dir = entry?.path();
            let index_path = dir.join(persist::INDEX_FILE);
            let Some(text) = read_optional(&index_path)? else { continue };
            let index: IndexFile = serde_json::from_str(&text).map_err(|e| corrupt(&index_path, e))?;
            let mut versions = Vec::new();
            for (i, entry) in index.versions.into_iter().enumerate() {
                let path = persist::version_file(&root, &index.party, entry.version);
                if entry.version != i as i64 + 1 {
                    return Err(corrupt(&index_path, "versions are not consecutive from 1"));
                }
                let bytes = std::fs::read_to_string(&path)?;
                if content_hash(bytes.as_bytes()) != entry.hash {
                    return Err(corrupt(&path, "content hash does not match index"));
                }
                let policy = parse_policy(&bytes).map_err(|e| corrupt(&path, e))?;
                let report = validate_policy(&policy);
                if !report.is_valid() || policy.party != index.party || policy.version != entry.version {
                    return Err(corrupt(&path, "stored policy does not match its index entry"));
                }
                versions.push(StoredVersion {
                    party: index.party.clone(),
                    version: entry.version,
                    bytes,
                    hash: entry.hash,
                    received_at: entry.received_at,
                    warnings: report.warnings,
                });
                state.latest.insert(index.party.clone(), policy);
            }
            if !versions.is_empty() {
                state.registry.insert(index.party, versions);
            }
        }
        state.rebuild_graph();

        let catalog_path = root.join(persist::CATALOG_FILE);
        if let Some(text) = read_optional(&catalog_path)? {
            let apps: Vec<AppRecord> = serde_json::from_str(&text).map_err(|e| corrupt(&catalog_path, e))?;
            for app in apps {
                check_app(&app).map_err(|e| corrupt(&catalog_path, e))?;
                if state.catalog.contains_key(&app.app_id) {
                    return Err(corrupt(&catalog_path, format!("duplicate app_id {}", app.app_id)));
                }
                state.catalog.insert(app.app_id.clone(), app);
            }
        }

        let profiles_path = root.join(persist::PROFILES_FILE);
        if let Some(text) = read_optional(&profiles_path)? {
            let docs: Vec<Value> = serde_json::from_str(&text).map_err(|e| corrupt(&profiles_path, e))?;
            for doc in docs {
                let profile = PreferenceProfile::from_json(doc).map_err(|e| corrupt(&profiles_path, e))?;
                state.profiles.insert(profile.profile_id.clone(), profile);
            }
        }

        let feed_path = root.join(persist::FEED_FILE);
        if let Some(text) = read_optional(&feed_path)? {
            state.feed = serde_json::from_str(&text).map_err(|e| corrupt(&feed_path, e))?;
        }

        Ok(Store { root, config, state: RwLock::new(state) })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn data_dir(&self) -> &Path {
        &self.root
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }

    fn save_feed(&self, feed: &Feed) -> Result<(), StoreError> {
        Ok(write_json(&self.root.join(persist::FEED_FILE), feed)?)
    }

    /// Parse, validate and append a policy as the party's next version.
    pub fn put_policy(&self, party: &str, body: &str) -> Result<PutOutcome, StoreError> {
        let policy = parse_policy(body).map_err(StoreError::Parse)?;
        if policy.party != party {
            return Err(StoreError::PartyMismatch { path: party.to_string(), body: policy.party });
        }
        let report = validate_policy(&policy);
        if !report.is_valid() {
            return Err(StoreError::Validation(report));
        }

        let mut state = self.write();
        let expected = state.registry.get(party).map_or(1, |v| v.len() as i64 + 1);
        if policy.version != expected {
            return Err(StoreError::VersionConflict { expected, declared: policy.version });
        }

        let bytes = serialize_canonical(&policy);
        let stored = StoredVersion {
            party: party.to_string(),
            version: policy.version,
            hash: content_hash(bytes.as_bytes()),
            bytes,
            received_at: now(),
            warnings: report.warnings,
        };
        write_atomic(&persist::version_file(&self.root, party, stored.version), stored.bytes.as_bytes())?;
        let mut versions = state.registry.get(party).cloned().unwrap_or_default();
        versions.push(stored.clone());
        let index = IndexFile {
            party: party.to_string(),
            versions: versions
                .iter()
                .map(|v| IndexEntry { version: v.version, hash: v.hash.clone(), received_at: v.received_at.clone() })
                .collect(),
        };
        write_json(&persist::party_dir(&self.root, party).join(persist::INDEX_FILE), &index)?;

        state.registry.insert(party.to_string(), versions);
        let previous = state.latest.insert(party.to_string(), policy.clone());
        state.rebuild_graph();

        let mut feed = state.feed.clone();
        if let Some(old) = &previous {
            for profile in state.profiles.values() {
                for app in profile.installed_apps.iter().filter_map(|id| state.catalog.get(id)) {
                    if app.party != party {
                        continue;
                    }
                    // Both versions passed validation and versions increase,
                    // so the update check cannot fail.
                    if let Ok(bodies) = alerts_from_update_with(old, &policy, profile, &app.app_id, &self.config.weights) {
                        bodies.into_iter().for_each(|b| feed.push(b));
                    }
                }
            }
        }
        let advisories = feed.advisories.clone();
        state.advisory_alerts(&mut feed, &advisories);
        if feed.last_seq != state.feed.last_seq {
            self.save_feed(&feed)?;
            state.feed = feed;
        }

        Ok(PutOutcome { party: stored.party, version: stored.version, hash: stored.hash, warnings: stored.warnings })
    }

    /// The requested version, or the latest.
    pub fn fetch_policy(&self, party: &str, version: Option<i64>) -> Result<StoredVersion, StoreError> {
        let state = self.read();
        let versions = state
            .registry
            .get(party)
            .ok_or_else(|| StoreError::NotFound(format!("no policy registered for {party}")))?;
        let found = match version {
            None => versions.last(),
            Some(v) => versions.iter().find(|s| s.version == v),
        };
        found.cloned().ok_or_else(|| {
            StoreError::NotFound(format!("{party} has no version {}", version.unwrap_or_default()))
        })
    }

    pub fn graph(&self) -> SharingGraph {
        self.read().graph.clone()
    }

    pub fn audit(&self) -> AuditReport {
        audit_references(&self.read().graph)
    }

    pub fn search_apps(&self, query: &SearchQuery) -> Vec<SearchResult> {
        let state = self.read();
        self.search_in(&state, query)
    }

    fn search_in(&self, state: &State, query: &SearchQuery) -> Vec<SearchResult> {
        let terms = query_terms(&query.q);
        let mut results: Vec<SearchResult> = state
            .catalog
            .values()
            .filter_map(|app| {
                let badge = state.badge(&app.party);
                if !passes(&query.filters, app, &state.latest, badge) {
                    return None;
                }
                let relevance = relevance(&terms, app);
                if relevance == 0.0 {
                    return None;
                }
                Some(SearchResult {
                    app_id: app.app_id.clone(),
                    name: app.name.clone(),
                    relevance,
                    badge,
                    base_score: relevance * (1.0 + self.config.boosts.boost(badge)),
                    personalized_raw: None,
                    personalized_score: None,
                })
            })
            .collect();
        rank(&mut results, |r| r.base_score);
        results
    }

    /// Search re-ranked by `base_score × (1 + raw) / 6`, where `raw` is the
    /// app's star rating against the profile.
    pub fn personalized_search(&self, profile_id: &str, query: &SearchQuery) -> Result<Vec<SearchResult>, StoreError> {
        let state = self.read();
        let profile = state.profile(profile_id)?;
        let blacklist = profile.effective_blacklist(&state.feed.advisories);
        let ctx = RatingContext {
            graph: &state.graph,
            policies: &state.latest,
            profile,
            blacklist: &blacklist,
            weights: &self.config.weights,
        };
        let mut results = self.search_in(&state, query);
        for r in &mut results {
            let raw = ctx.raw_rating(&state.catalog[&r.app_id]);
            r.personalized_raw = Some(raw);
            r.personalized_score = Some(r.base_score * (1.0 + raw) / 6.0);
        }
        rank(&mut results, |r| r.personalized_score.unwrap_or_default());
        Ok(results)
    }

    pub fn app_badge(&self, app_id: &str) -> Result<AppBadge, StoreError> {
        let state = self.read();
        let app = state.app(app_id)?;
        Ok(AppBadge { app_id: app.app_id.clone(), party: app.party.clone(), badge: state.badge(&app.party) })
    }

    pub fn app_gap(&self, app_id: &str, target: BadgeLevel) -> Result<GapReport, StoreError> {
        let state = self.read();
        let app = state.app(app_id)?;
        if state.graph.contains(&app.party) {
            return Ok(badge_gap_report(&state.graph, &app.party, target).expect("party is in the graph"));
        }
        // Unknown to the registry: the party itself is the whole gap.
        let needs = target > BadgeLevel::None;
        Ok(GapReport {
            party: app.party.clone(),
            target_badge: target,
            missing_parties: if needs { [app.party.clone()].into() } else { BTreeSet::new() },
            self_actions: if needs { vec![PUBLISH_ACTION.to_string()] } else { Vec::new() },
        })
    }

    pub fn exposure(&self, app_id: &str, party: &str) -> Result<Exposure, StoreError> {
        let state = self.read();
        let app = state.app(app_id)?;
        let unreachable = || StoreError::Unreachable { app_id: app_id.to_string(), party: party.to_string() };
        let path = shortest_path(&state.graph, &app.party, party).ok().flatten().ok_or_else(unreachable)?;
        Ok(Exposure { app_id: app.app_id.clone(), party: party.to_string(), distance: path.len() - 1, path })
    }

    /// Store a profile; `true` when it did not exist before.
    pub fn put_profile(&self, profile_id: &str, profile: PreferenceProfile) -> Result<bool, StoreError> {
        if profile.profile_id != profile_id {
            return Err(StoreError::BadRequest(format!(
                "document profile_id {} does not match request profile {profile_id}",
                profile.profile_id
            )));
        }
        let mut state = self.write();
        let mut profiles = state.profiles.clone();
        let created = profiles.insert(profile_id.to_string(), profile).is_none();
        let docs: Vec<Value> = profiles.values().map(PreferenceProfile::to_json).collect();
        write_json(&self.root.join(persist::PROFILES_FILE), &docs)?;
        state.profiles = profiles;
        Ok(created)
    }

    pub fn profile(&self, profile_id: &str) -> Result<PreferenceProfile, StoreError> {
        self.read().profile(profile_id).cloned()
    }

    /// Add the party to the advisory list and alert every honoring profile
    /// whose installed apps reach it. Returns the number of new alerts.
    pub fn report_breach(&self, event: &BreachEvent) -> Result<usize, StoreError> {
        event.check().map_err(StoreError::InvalidEvent)?;
        let mut state = self.write();
        let mut feed = state.feed.clone();
        feed.advisories.insert(event.party.clone());
        let count = state.advisory_alerts(&mut feed, [&event.party]);
        if feed.advisories != state.feed.advisories || count > 0 {
            self.save_feed(&feed)?;
            state.feed = feed;
        }
        Ok(count)
    }

    /// Alerts for the profile with `created_seq > since`, oldest first. The
    /// returned cursor is the last sequence number delivered, or `since`.
    pub fn poll_alerts(&self, profile_id: &str, since: u64) -> Result<AlertPage, StoreError> {
        let state = self.read();
        state.profile(profile_id)?;
        let alerts: Vec<Alert> = state
            .feed
            .alerts
            .iter()
            .filter(|a| a.body.profile_id == profile_id && a.created_seq > since)
            .cloned()
            .collect();
        let cursor = alerts.last().map_or(since, |a| a.created_seq);
        Ok(AlertPage { alerts, cursor })
    }

    pub fn advisories(&self) -> BTreeSet<String> {
        self.read().feed.advisories.clone()
    }

    pub fn catalog(&self) -> Vec<AppRecord> {
        self.read().catalog.values().cloned().collect()
    }

    /// Add or replace a catalog record.
    pub fn put_app(&self, app: AppRecord) -> Result<(), StoreError> {
        check_app(&app)?;
        let mut state = self.write();
        let mut catalog = state.catalog.clone();
        catalog.insert(app.app_id.clone(), app);
        let apps: Vec<&AppRecord> = catalog.values().collect();
        write_json(&self.root.join(persist::CATALOG_FILE), &apps)?;
        state.catalog = catalog;
        Ok(())
    }
}
