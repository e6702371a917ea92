//! App catalog records and the per-user rating of one app.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::alert::{blacklist_hits, scan_blacklist_domains};
use crate::graph::SharingGraph;
use crate::policy::Policy;
use crate::preference::{evaluate_policy_with, PreferenceProfile};
use crate::rating::{star_rating_with, RatingWeights, NEUTRAL_PRIOR};
use crate::scaffold::PermissionManifest;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppRecord {
    pub app_id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub store_category: String,
    pub party: String,
    #[serde(default)]
    pub permission_manifest: PermissionManifest,
}

impl AppRecord {
    /// Case-folded alphanumeric terms of the name and description.
    pub fn terms(&self) -> BTreeSet<String> {
        tokenize(&self.name).chain(tokenize(&self.description)).collect()
    }
}

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Everything needed to rate apps for one person.
pub struct RatingContext<'a> {
    pub graph: &'a SharingGraph,
    /// Latest valid policy per party domain.
    pub policies: &'a BTreeMap<String, Policy>,
    pub profile: &'a PreferenceProfile,
    /// Profile blacklist already merged with any honored advisories.
    pub blacklist: &'a BTreeSet<String>,
    pub weights: &'a RatingWeights,
}

impl RatingContext<'_> {
    /// Raw personalized rating of `app`, or the neutral prior when its party
    /// has no valid policy.
    pub fn raw_rating(&self, app: &AppRecord) -> f64 {
        let Some(policy) = self.policies.get(&app.party) else {
            return NEUTRAL_PRIOR;
        };
        let Ok(violations) = evaluate_policy_with(policy, self.profile, self.weights) else {
            return NEUTRAL_PRIOR;
        };
        let hits = if self.graph.contains(&app.party) {
            scan_blacklist_domains(self.graph, self.blacklist, &self.profile.profile_id, &app.party, &app.app_id)
                .map(|alerts| blacklist_hits(&alerts))
                .unwrap_or_default()
        } else {
            Vec::new()
        };
        star_rating_with(self.weights, &violations, &hits).raw
    }
}
