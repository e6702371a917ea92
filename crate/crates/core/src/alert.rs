//! Alerts raised for a profile: policy updates that introduce new
//! conflicts, and blacklisted parties reachable from an installed app.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diff::{diff_policies, DiffError};
use crate::domain::is_valid_domain;
use crate::graph::{bfs_tree, path_in_tree, GraphError, SharingGraph};
use crate::policy::{Policy, Timestamp};
use crate::preference::{evaluate_policy_with, EvaluationError, PreferenceProfile, Violation};
use crate::rating::RatingWeights;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlertKind {
    PolicyConflict {
        party: String,
        from_version: i64,
        to_version: i64,
        violations: Vec<Violation>,
    },
    BlacklistReachable {
        party: String,
        path: Vec<String>,
        distance: usize,
    },
}

/// An alert before the feed has assigned it a sequence number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertBody {
    pub profile_id: String,
    pub app_id: String,
    #[serde(flatten)]
    pub kind: AlertKind,
}

impl AlertBody {
    pub fn issue(self, created_seq: u64) -> Alert {
        Alert { alert_id: format!("alert-{created_seq}"), created_seq, body: self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub alert_id: String,
    pub created_seq: u64,
    #[serde(flatten)]
    pub body: AlertBody,
}

/// A reported compromise of one party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreachEvent {
    pub party: String,
    pub occurred_at: String,
    #[serde(default)]
    pub note: String,
}

impl BreachEvent {
    pub fn check(&self) -> Result<(), String> {
        if !is_valid_domain(&self.party) {
            return Err(format!("party {:?} is not a lowercase DNS name", self.party));
        }
        if Timestamp::parse(&self.occurred_at).as_utc().is_none() {
            return Err(format!("occurred_at {:?} is not an RFC 3339 UTC timestamp", self.occurred_at));
        }
        Ok(())
    }
}

/// One alert per blacklisted domain reachable from `app_party`, carrying
/// the shortest path (smallest next hop on ties). The app's own party counts,
/// at distance 0.
pub fn scan_blacklist_domains(
    graph: &SharingGraph,
    blacklist: &BTreeSet<String>,
    profile_id: &str,
    app_party: &str,
    app_id: &str,
) -> Result<Vec<AlertBody>, GraphError> {
    let tree = bfs_tree(graph, app_party)?;
    Ok(blacklist
        .iter()
        .filter_map(|party| {
            let path = path_in_tree(&tree, party)?;
            Some(AlertBody {
                profile_id: profile_id.to_string(),
                app_id: app_id.to_string(),
                kind: AlertKind::BlacklistReachable { party: party.clone(), distance: path.len() - 1, path },
            })
        })
        .collect())
}

pub fn scan_blacklist(
    graph: &SharingGraph,
    profile: &PreferenceProfile,
    app_party: &str,
    app_id: &str,
) -> Result<Vec<AlertBody>, GraphError> {
    scan_blacklist_domains(graph, &profile.blacklist, &profile.profile_id, app_party, app_id)
}

/// `(domain, distance)` pairs from blacklist alerts, for star ratings.
pub fn blacklist_hits(alerts: &[AlertBody]) -> Vec<(String, usize)> {
    alerts
        .iter()
        .filter_map(|a| match &a.kind {
            AlertKind::BlacklistReachable { party, distance, .. } => Some((party.clone(), *distance)),
            AlertKind::PolicyConflict { .. } => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UpdateError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

/// Alert when `new` violates the profile in a way `old` did not. Violations
/// are compared by (kind, category, detail); the alert carries only the new
/// ones.
pub fn alerts_from_update(
    old: &Policy,
    new: &Policy,
    profile: &PreferenceProfile,
    app_id: &str,
) -> Result<Vec<AlertBody>, UpdateError> {
    alerts_from_update_with(old, new, profile, app_id, &RatingWeights::default())
}

pub fn alerts_from_update_with(
    old: &Policy,
    new: &Policy,
    profile: &PreferenceProfile,
    app_id: &str,
    weights: &RatingWeights,
) -> Result<Vec<AlertBody>, UpdateError> {
    diff_policies(old, new)?;
    let before = evaluate_policy_with(old, profile, weights)?;
    let after = evaluate_policy_with(new, profile, weights)?;
    let known: BTreeSet<_> = before.iter().map(Violation::key).collect();
    let fresh: Vec<Violation> = after.iter().filter(|v| !known.contains(&v.key())).cloned().collect();
    if fresh.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![AlertBody {
        profile_id: profile.profile_id.clone(),
        app_id: app_id.to_string(),
        kind: AlertKind::PolicyConflict {
            party: new.party.clone(),
            from_version: old.version,
            to_version: new.version,
            violations: fresh,
        },
    }])
}
