//! Structural diff between two versions of one party's policy, and the
//! matching patch operation.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::codec::policy_to_value;
use crate::policy::{DataPractice, Flow, Policy, Retention, Timestamp, INDEFINITE};
use crate::vocab::{DataCategory, Frequency, Linkage, Purpose, Security, Storage};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiffError {
    #[error("policies belong to different parties ({old} vs {new})")]
    PartyMismatch { old: String, new: String },
    #[error("new version {new} does not follow old version {old}")]
    NonMonotonicVersion { old: i64, new: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("delta is for {expected}, policy is {found}")]
    WrongBase { expected: String, found: String },
    #[error("no practice for {0} to change or remove")]
    MissingPractice(DataCategory),
    #[error("practice {category} field {field} does not hold the expected old value")]
    StaleField { category: DataCategory, field: &'static str },
    #[error("flow to remove is not present")]
    MissingFlow,
}

/// A single changed context field of a practice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldChange {
    Purposes { old: BTreeSet<Purpose>, new: BTreeSet<Purpose> },
    Frequency { old: Frequency, new: Frequency },
    Storage { old: Storage, new: Storage },
    Retention { old: Retention, new: Retention },
    Linkage { old: Linkage, new: Linkage },
    Security { old: BTreeSet<Security>, new: BTreeSet<Security> },
}

impl FieldChange {
    pub fn field(&self) -> &'static str {
        match self {
            FieldChange::Purposes { .. } => "purposes",
            FieldChange::Frequency { .. } => "frequency",
            FieldChange::Storage { .. } => "storage",
            FieldChange::Retention { .. } => "retention_days",
            FieldChange::Linkage { .. } => "linkage",
            FieldChange::Security { .. } => "security",
        }
    }

    fn values(&self) -> (Value, Value) {
        fn set<T: Copy>(s: &BTreeSet<T>, f: fn(T) -> &'static str) -> Value {
            let mut v: Vec<_> = s.iter().map(|x| f(*x)).collect();
            v.sort_unstable();
            json!(v)
        }
        fn ret(r: &Retention) -> Value {
            match r {
                Retention::Days(d) => json!(d),
                Retention::Indefinite => json!(INDEFINITE),
            }
        }
        match self {
            FieldChange::Purposes { old, new } => (set(old, Purpose::as_str), set(new, Purpose::as_str)),
            FieldChange::Frequency { old, new } => (json!(old.as_str()), json!(new.as_str())),
            FieldChange::Storage { old, new } => (json!(old.as_str()), json!(new.as_str())),
            FieldChange::Retention { old, new } => (ret(old), ret(new)),
            FieldChange::Linkage { old, new } => (json!(old.as_str()), json!(new.as_str())),
            FieldChange::Security { old, new } => (set(old, Security::as_str), set(new, Security::as_str)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaEntry {
    PracticeAdded(DataPractice),
    PracticeRemoved(DataPractice),
    PracticeFieldChanged { category: DataCategory, change: FieldChange },
    FlowAdded(Flow),
    FlowRemoved(Flow),
    AppIdChanged { old: Option<String>, new: Option<String> },
}

impl DeltaEntry {
    pub fn kind(&self) -> &'static str {
        match self {
            DeltaEntry::PracticeAdded(_) => "practice-added",
            DeltaEntry::PracticeRemoved(_) => "practice-removed",
            DeltaEntry::PracticeFieldChanged { .. } => "practice-field-changed",
            DeltaEntry::FlowAdded(_) => "flow-added",
            DeltaEntry::FlowRemoved(_) => "flow-removed",
            DeltaEntry::AppIdChanged { .. } => "app-id-changed",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            DeltaEntry::PracticeAdded(p) | DeltaEntry::PracticeRemoved(p) => {
                json!({ "kind": self.kind(), "practice": practice_json(p) })
            }
            DeltaEntry::PracticeFieldChanged { category, change } => {
                let (old, new) = change.values();
                json!({
                    "kind": self.kind(),
                    "category": category.as_str(),
                    "field": change.field(),
                    "old": old,
                    "new": new,
                })
            }
            DeltaEntry::FlowAdded(f) | DeltaEntry::FlowRemoved(f) => {
                json!({ "kind": self.kind(), "flow": flow_json(f) })
            }
            DeltaEntry::AppIdChanged { old, new } => json!({ "kind": self.kind(), "old": old, "new": new }),
        }
    }
}

// Reuse the document encoding for embedded practices and flows.
fn practice_json(p: &DataPractice) -> Value {
    let mut policy = Policy::new("", 0, Timestamp::Unparsed(String::new()));
    policy.practices.push(p.clone());
    policy_to_value(&policy)["practices"][0].clone()
}

fn flow_json(f: &Flow) -> Value {
    let mut policy = Policy::new("", 0, Timestamp::Unparsed(String::new()));
    policy.flows.push(f.clone());
    policy_to_value(&policy)["flows"][0].clone()
}

/// Changes between two versions. Version and issue time travel in the
/// header; `entries` is empty when the bodies are identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyDelta {
    pub party: String,
    pub from_version: i64,
    pub to_version: i64,
    pub issued_at: Timestamp,
    pub entries: Vec<DeltaEntry>,
}

impl PolicyDelta {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "party": self.party,
            "from_version": self.from_version,
            "to_version": self.to_version,
            "issued_at": self.issued_at.render(),
            "entries": self.entries.iter().map(DeltaEntry::to_json).collect::<Vec<_>>(),
        })
    }
}

pub fn diff_policies(old: &Policy, new: &Policy) -> Result<PolicyDelta, DiffError> {
    if old.party != new.party {
        return Err(DiffError::PartyMismatch { old: old.party.clone(), new: new.party.clone() });
    }
    if new.version <= old.version {
        return Err(DiffError::NonMonotonicVersion { old: old.version, new: new.version });
    }
    let old = old.normalized();
    let new = new.normalized();
    let mut entries = Vec::new();

    if old.app_id != new.app_id {
        entries.push(DeltaEntry::AppIdChanged { old: old.app_id.clone(), new: new.app_id.clone() });
    }

    let mut by_category: BTreeMap<&str, (Vec<&DataPractice>, Vec<&DataPractice>)> = BTreeMap::new();
    for p in &old.practices {
        by_category.entry(p.category.as_str()).or_default().0.push(p);
    }
    for p in &new.practices {
        by_category.entry(p.category.as_str()).or_default().1.push(p);
    }
    for (olds, news) in by_category.into_values() {
        match (olds.as_slice(), news.as_slice()) {
            ([a], [b]) => field_changes(a, b, &mut entries),
            _ => {
                let (removed, added) = multiset_difference(&olds, &news);
                entries.extend(removed.into_iter().map(|p| DeltaEntry::PracticeRemoved(p.clone())));
                entries.extend(added.into_iter().map(|p| DeltaEntry::PracticeAdded(p.clone())));
            }
        }
    }

    let old_flows: Vec<&Flow> = old.flows.iter().collect();
    let new_flows: Vec<&Flow> = new.flows.iter().collect();
    let (removed, added) = multiset_difference(&old_flows, &new_flows);
    entries.extend(removed.into_iter().map(|f| DeltaEntry::FlowRemoved(f.clone())));
    entries.extend(added.into_iter().map(|f| DeltaEntry::FlowAdded(f.clone())));

    Ok(PolicyDelta {
        party: new.party.clone(),
        from_version: old.version,
        to_version: new.version,
        issued_at: new.issued_at.clone(),
        entries,
    })
}

fn field_changes(a: &DataPractice, b: &DataPractice, out: &mut Vec<DeltaEntry>) {
    let category = a.category;
    let mut push = |change| out.push(DeltaEntry::PracticeFieldChanged { category, change });
    if a.purposes != b.purposes {
        push(FieldChange::Purposes { old: a.purposes.clone(), new: b.purposes.clone() });
    }
    if a.frequency != b.frequency {
        push(FieldChange::Frequency { old: a.frequency, new: b.frequency });
    }
    if a.storage != b.storage {
        push(FieldChange::Storage { old: a.storage, new: b.storage });
    }
    if a.retention != b.retention {
        push(FieldChange::Retention { old: a.retention, new: b.retention });
    }
    if a.linkage != b.linkage {
        push(FieldChange::Linkage { old: a.linkage, new: b.linkage });
    }
    if a.security != b.security {
        push(FieldChange::Security { old: a.security.clone(), new: b.security.clone() });
    }
}

/// Elements of `old` with no equal partner in `new`, and vice versa,
/// matching duplicates one-to-one.
fn multiset_difference<'a, T: PartialEq>(old: &[&'a T], new: &[&'a T]) -> (Vec<&'a T>, Vec<&'a T>) {
    let mut unmatched_new: Vec<Option<&T>> = new.iter().map(|x| Some(*x)).collect();
    let mut removed = Vec::new();
    for item in old {
        match unmatched_new.iter_mut().find(|slot| slot.is_some_and(|n| n == *item)) {
            Some(slot) => *slot = None,
            None => removed.push(*item),
        }
    }
    (removed, unmatched_new.into_iter().flatten().collect())
}

/// Apply a delta to the policy it was computed from.
pub fn apply_delta(base: &Policy, delta: &PolicyDelta) -> Result<Policy, ApplyError> {
    if base.party != delta.party || base.version != delta.from_version {
        return Err(ApplyError::WrongBase {
            expected: format!("{} v{}", delta.party, delta.from_version),
            found: format!("{} v{}", base.party, base.version),
        });
    }
    let mut out = base.clone();
    out.version = delta.to_version;
    out.issued_at = delta.issued_at.clone();

    for entry in &delta.entries {
        match entry {
            DeltaEntry::AppIdChanged { new, .. } => out.app_id = new.clone(),
            DeltaEntry::PracticeAdded(p) => out.practices.push(p.clone()),
            DeltaEntry::PracticeRemoved(p) => {
                let at = out.practices.iter().position(|q| q == p).ok_or(ApplyError::MissingPractice(p.category))?;
                out.practices.remove(at);
            }
            DeltaEntry::PracticeFieldChanged { category, change } => {
                let practice = out
                    .practices
                    .iter_mut()
                    .find(|p| p.category == *category)
                    .ok_or(ApplyError::MissingPractice(*category))?;
                let stale = || ApplyError::StaleField { category: *category, field: change.field() };
                match change {
                    FieldChange::Purposes { old, new } => {
                        (practice.purposes == *old).then_some(()).ok_or_else(stale)?;
                        practice.purposes = new.clone();
                    }
                    FieldChange::Frequency { old, new } => {
                        (practice.frequency == *old).then_some(()).ok_or_else(stale)?;
                        practice.frequency = *new;
                    }
                    FieldChange::Storage { old, new } => {
                        (practice.storage == *old).then_some(()).ok_or_else(stale)?;
                        practice.storage = *new;
                    }
                    FieldChange::Retention { old, new } => {
                        (practice.retention == *old).then_some(()).ok_or_else(stale)?;
                        practice.retention = *new;
                    }
                    FieldChange::Linkage { old, new } => {
                        (practice.linkage == *old).then_some(()).ok_or_else(stale)?;
                        practice.linkage = *new;
                    }
                    FieldChange::Security { old, new } => {
                        (practice.security == *old).then_some(()).ok_or_else(stale)?;
                        practice.security = new.clone();
                    }
                }
            }
            DeltaEntry::FlowAdded(f) => out.flows.push(f.clone()),
            DeltaEntry::FlowRemoved(f) => {
                let at = out.flows.iter().position(|g| g == f).ok_or(ApplyError::MissingFlow)?;
                out.flows.remove(at);
            }
        }
    }
    out.normalize();
    Ok(out)
}
