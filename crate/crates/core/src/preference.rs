//! Privacy preference profiles and policy evaluation against them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::canonical::to_canonical_string;
use crate::domain::is_valid_domain;
use crate::policy::{Policy, Retention};
use crate::rating::RatingWeights;
use crate::validate::validate_policy;
use crate::vocab::{DataCategory, Linkage, Purpose, Security};

/// File extension for profile documents.
pub const PROFILE_EXTENSION: &str = ".profile.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sharing {
    Forbid,
    Allow,
}

/// Limits on how one category may be handled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraints {
    pub allowed_purposes: BTreeSet<Purpose>,
    /// `None` is unlimited.
    pub max_retention_days: Option<u64>,
    pub allowed_linkage: BTreeSet<Linkage>,
    pub required_security: BTreeSet<Security>,
    pub sharing: Sharing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stance {
    /// The category must not be collected at all.
    Deny,
    Constrain(Constraints),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryRule {
    pub category: DataCategory,
    pub stance: Stance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    pub profile_id: String,
    rules: BTreeMap<DataCategory, Stance>,
    pub blacklist: BTreeSet<String>,
    pub honor_advisories: bool,
    pub installed_apps: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("malformed profile: {0}")]
    Malformed(String),
    #[error("more than one rule for category {0}")]
    DuplicateRule(DataCategory),
    #[error("blacklist entry {0:?} is not a lowercase DNS name")]
    InvalidDomain(String),
    #[error("profile_id must be non-empty")]
    EmptyId,
}

impl PreferenceProfile {
    pub fn new(profile_id: impl Into<String>) -> Self {
        Self {
            profile_id: profile_id.into(),
            rules: BTreeMap::new(),
            blacklist: BTreeSet::new(),
            honor_advisories: false,
            installed_apps: BTreeSet::new(),
        }
    }

    pub fn add_rule(&mut self, rule: CategoryRule) -> Result<(), ProfileError> {
        if self.rules.contains_key(&rule.category) {
            return Err(ProfileError::DuplicateRule(rule.category));
        }
        self.rules.insert(rule.category, rule.stance);
        Ok(())
    }

    pub fn with_rule(mut self, category: DataCategory, stance: Stance) -> Self {
        self.rules.insert(category, stance);
        self
    }

    pub fn rule(&self, category: DataCategory) -> Option<&Stance> {
        self.rules.get(&category)
    }

    pub fn rules(&self) -> impl Iterator<Item = CategoryRule> + '_ {
        self.rules.iter().map(|(c, s)| CategoryRule { category: *c, stance: s.clone() })
    }

    /// Own blacklist plus, when the profile opts in, advisory-listed parties.
    pub fn effective_blacklist(&self, advisories: &BTreeSet<String>) -> BTreeSet<String> {
        let mut out = self.blacklist.clone();
        if self.honor_advisories {
            out.extend(advisories.iter().cloned());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rules: Vec<Value> = self
            .rules
            .iter()
            .map(|(category, stance)| match stance {
                Stance::Deny => json!({ "category": category.as_str(), "stance": "deny" }),
                Stance::Constrain(c) => json!({
                    "category": category.as_str(),
                    "stance": "constrain",
                    "allowed_purposes": sorted(c.allowed_purposes.iter().map(|p| p.as_str())),
                    "max_retention_days": match c.max_retention_days {
                        Some(d) => json!(d),
                        None => json!(UNLIMITED),
                    },
                    "allowed_linkage": sorted(c.allowed_linkage.iter().map(|l| l.as_str())),
                    "required_security": sorted(c.required_security.iter().map(|s| s.as_str())),
                    "sharing": c.sharing,
                }),
            })
            .collect();
        let mut rules = rules;
        rules.sort_by(|a, b| a["category"].as_str().cmp(&b["category"].as_str()));
        json!({
            "profile_id": self.profile_id,
            "rules": rules,
            "blacklist": self.blacklist,
            "honor_advisories": self.honor_advisories,
            "installed_apps": self.installed_apps,
        })
    }

    pub fn to_canonical(&self) -> String {
        to_canonical_string(&self.to_json())
    }

    pub fn from_json_str(text: &str) -> Result<Self, ProfileError> {
        let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| ProfileError::Malformed(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn from_json(value: Value) -> Result<Self, ProfileError> {
        let doc: ProfileDoc = serde_json::from_value(value).map_err(|e| ProfileError::Malformed(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: ProfileDoc) -> Result<Self, ProfileError> {
        if doc.profile_id.is_empty() {
            return Err(ProfileError::EmptyId);
        }
        let mut profile = PreferenceProfile::new(doc.profile_id);
        for rule in doc.rules {
            profile.add_rule(rule.try_into().map_err(ProfileError::Malformed)?)?;
        }
        if let Some(bad) = doc.blacklist.iter().find(|d| !is_valid_domain(d)) {
            return Err(ProfileError::InvalidDomain(bad.clone()));
        }
        profile.blacklist = doc.blacklist.into_iter().collect();
        profile.honor_advisories = doc.honor_advisories;
        profile.installed_apps = doc.installed_apps.into_iter().collect();
        Ok(profile)
    }
}

const UNLIMITED: &str = "unlimited";

fn sorted<'a>(names: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<_> = names.collect();
    v.sort_unstable();
    v
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    profile_id: String,
    rules: Vec<RuleDoc>,
    blacklist: Vec<String>,
    honor_advisories: bool,
    installed_apps: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    category: DataCategory,
    stance: String,
    allowed_purposes: Option<BTreeSet<Purpose>>,
    max_retention_days: Option<Value>,
    allowed_linkage: Option<BTreeSet<Linkage>>,
    required_security: Option<BTreeSet<Security>>,
    sharing: Option<Sharing>,
}

impl TryFrom<RuleDoc> for CategoryRule {
    type Error = String;

    fn try_from(doc: RuleDoc) -> Result<Self, String> {
        let category = doc.category;
        let stance = match doc.stance.as_str() {
            "deny" => {
                if doc.allowed_purposes.is_some()
                    || doc.max_retention_days.is_some()
                    || doc.allowed_linkage.is_some()
                    || doc.required_security.is_some()
                    || doc.sharing.is_some()
                {
                    return Err(format!("deny rule for {category} carries constraint fields"));
                }
                Stance::Deny
            }
            "constrain" => {
                let missing = |f: &str| format!("constrain rule for {category} is missing `{f}`");
                let max_retention_days = match doc.max_retention_days.ok_or_else(|| missing("max_retention_days"))? {
                    Value::String(s) if s == UNLIMITED => None,
                    Value::Number(n) if n.is_u64() => n.as_u64(),
                    other => return Err(format!("max_retention_days must be a non-negative integer or \"{UNLIMITED}\", got {other}")),
                };
                Stance::Constrain(Constraints {
                    allowed_purposes: doc.allowed_purposes.ok_or_else(|| missing("allowed_purposes"))?,
                    max_retention_days,
                    allowed_linkage: doc.allowed_linkage.ok_or_else(|| missing("allowed_linkage"))?,
                    required_security: doc.required_security.ok_or_else(|| missing("required_security"))?,
                    sharing: doc.sharing.ok_or_else(|| missing("sharing"))?,
                })
            }
            other => return Err(format!("unknown stance `{other}`")),
        };
        Ok(CategoryRule { category, stance })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DeniedCategory,
    Purpose,
    Retention,
    Linkage,
    Security,
    SharingForbidden,
    BlacklistedParty,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::DeniedCategory => "denied-category",
            ViolationKind::Purpose => "purpose",
            ViolationKind::Retention => "retention",
            ViolationKind::Linkage => "linkage",
            ViolationKind::Security => "security",
            ViolationKind::SharingForbidden => "sharing-forbidden",
            ViolationKind::BlacklistedParty => "blacklisted-party",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<DataCategory>,
    pub detail: String,
    pub weight: f64,
}

impl Violation {
    /// Identity used when comparing violation sets across policy versions.
    pub fn key(&self) -> (ViolationKind, Option<DataCategory>, &str) {
        (self.kind, self.category, &self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvaluationError {
    #[error("policy for {party} is not valid ({errors} errors)")]
    InvalidPolicy { party: String, errors: usize },
}

/// Violations of `profile` by `policy`, with default weights.
pub fn evaluate_policy(policy: &Policy, profile: &PreferenceProfile) -> Result<Vec<Violation>, EvaluationError> {
    evaluate_policy_with(policy, profile, &RatingWeights::default())
}

/// Violations in canonical practice order; within a practice: purpose,
/// retention, linkage, security, sharing.
pub fn evaluate_policy_with(
    policy: &Policy,
    profile: &PreferenceProfile,
    weights: &RatingWeights,
) -> Result<Vec<Violation>, EvaluationError> {
    let report = validate_policy(policy);
    if !report.is_valid() {
        return Err(EvaluationError::InvalidPolicy { party: policy.party.clone(), errors: report.errors.len() });
    }
    let policy = policy.normalized();
    let mut out = Vec::new();
    let mut push = |kind: ViolationKind, category: DataCategory, detail: String| {
        out.push(Violation { kind, category: Some(category), detail, weight: weights.weight(kind) });
    };

    for practice in &policy.practices {
        let category = practice.category;
        let constraints = match profile.rule(category) {
            None => continue,
            Some(Stance::Deny) => {
                push(ViolationKind::DeniedCategory, category, format!("collects {category}, which the profile denies"));
                continue;
            }
            Some(Stance::Constrain(c)) => c,
        };

        let extra: Vec<&str> = sorted(
            practice.purposes.difference(&constraints.allowed_purposes).map(|p| p.as_str()),
        );
        if !extra.is_empty() {
            push(ViolationKind::Purpose, category, format!("uses {category} for {}", extra.join(", ")));
        }

        if let Some(max) = constraints.max_retention_days {
            if practice.retention.exceeds(max) {
                let held = match practice.retention {
                    Retention::Indefinite => "indefinitely".to_string(),
                    Retention::Days(d) => format!("for {d} days"),
                };
                push(ViolationKind::Retention, category, format!("keeps {category} {held}, limit {max} days"));
            }
        }

        if !constraints.allowed_linkage.contains(&practice.linkage) {
            push(ViolationKind::Linkage, category, format!("links {category} by {}", practice.linkage));
        }

        let missing: Vec<&str> = sorted(
            constraints.required_security.difference(&practice.security).map(|s| s.as_str()),
        );
        if !missing.is_empty() {
            push(ViolationKind::Security, category, format!("{category} lacks {}", missing.join(", ")));
        }

        if constraints.sharing == Sharing::Forbid {
            let partners: BTreeSet<&str> = policy
                .outbound()
                .filter(|f| f.categories.contains(&category))
                .map(|f| f.partner.domain.as_str())
                .collect();
            if !partners.is_empty() {
                let partners: Vec<&str> = partners.into_iter().collect();
                push(ViolationKind::SharingForbidden, category, format!("shares {category} with {}", partners.join(", ")));
            }
        }
    }
    Ok(out)
}
