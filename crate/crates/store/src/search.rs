//! Catalog search: term relevance, filters and badge boosts.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use mrpp_core::catalog::tokenize;
use mrpp_core::{AppRecord, BadgeLevel, DataCategory, Permission, Policy, Purpose};
use serde::Serialize;

use crate::error::StoreError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchFilters {
    pub require_mrpp: bool,
    pub min_badge: Option<BadgeLevel>,
    pub exclude_categories: BTreeSet<DataCategory>,
    pub exclude_purposes: BTreeSet<Purpose>,
    pub forbid_permissions: BTreeSet<Permission>,
}

/// A parsed search request. List-valued parameters may be repeated or
/// comma-separated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchQuery {
    pub q: String,
    pub filters: SearchFilters,
    pub profile: Option<String>,
}

fn list<T: FromStr>(value: &str, name: &str) -> Result<Vec<T>, StoreError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| StoreError::BadRequest(format!("{name}: {e}"))))
        .collect()
}

fn flag(value: &str, name: &str) -> Result<bool, StoreError> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" | "" => Ok(false),
        other => Err(StoreError::BadRequest(format!("{name}: expected true or false, got {other:?}"))),
    }
}

impl SearchQuery {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, StoreError> {
        let mut out = SearchQuery::default();
        for (key, value) in pairs {
            match key {
                "q" => out.q = value.to_string(),
                "profile" => out.profile = Some(value.to_string()),
                "require_mrpp" => out.filters.require_mrpp = flag(value, key)?,
                "min_badge" => {
                    out.filters.min_badge =
                        Some(value.parse().map_err(|e| StoreError::BadRequest(format!("min_badge: {e}")))?)
                }
                "exclude_category" => out.filters.exclude_categories.extend(list::<DataCategory>(value, key)?),
                "exclude_purpose" => out.filters.exclude_purposes.extend(list::<Purpose>(value, key)?),
                "forbid_permission" => out
                    .filters
                    .forbid_permissions
                    .extend(value.split(',').filter(|s| !s.is_empty()).map(Permission::from_name)),
                other => return Err(StoreError::BadRequest(format!("unknown query parameter {other:?}"))),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub app_id: String,
    pub name: String,
    pub relevance: f64,
    pub badge: BadgeLevel,
    pub base_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub personalized_raw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub personalized_score: Option<f64>,
}

/// Fraction of distinct query terms found in the app's name or
/// description. An empty query matches everything fully.
pub fn relevance(query_terms: &BTreeSet<String>, app: &AppRecord) -> f64 {
    if query_terms.is_empty() {
        return 1.0;
    }
    let terms = app.terms();
    query_terms.iter().filter(|t| terms.contains(*t)).count() as f64 / query_terms.len() as f64
}

pub fn query_terms(q: &str) -> BTreeSet<String> {
    tokenize(q).collect()
}

/// Whether `app` survives the filters, given the latest valid policy per
/// party and its badge. Apps without a policy are not dropped by the
/// category or purpose exclusions, since they declare nothing.
pub fn passes(filters: &SearchFilters, app: &AppRecord, policies: &BTreeMap<String, Policy>, badge: BadgeLevel) -> bool {
    let policy = policies.get(&app.party);
    if filters.require_mrpp && policy.is_none() {
        return false;
    }
    if filters.min_badge.is_some_and(|min| badge < min) {
        return false;
    }
    if filters.forbid_permissions.iter().any(|p| app.permission_manifest.contains(p)) {
        return false;
    }
    if let Some(policy) = policy {
        if policy.practices.iter().any(|p| filters.exclude_categories.contains(&p.category)) {
            return false;
        }
        let uses = |purpose: &Purpose| {
            policy.practices.iter().any(|p| p.purposes.contains(purpose))
                || policy.outbound().any(|f| f.purposes.contains(purpose))
        };
        if filters.exclude_purposes.iter().any(uses) {
            return false;
        }
    }
    true
}

/// Sort by `key` descending, ties by `app_id` ascending.
pub fn rank(results: &mut [SearchResult], key: impl Fn(&SearchResult) -> f64) {
    results.sort_by(|a, b| key(b).total_cmp(&key(a)).then_with(|| a.app_id.cmp(&b.app_id)));
}
