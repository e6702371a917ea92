//! Draft policies scaffolded from a platform permission manifest.
//!
//! Every mapped permission becomes a practice whose context is unknown.
//! Unknown context is recorded as a [`Todo`]; placeholder values are chosen
//! so the draft cannot pass validation (empty purposes, unparseable issue
//! time) and otherwise assume the least private handling.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::domain::is_valid_domain;
use crate::policy::{DataPractice, Flow, Policy, Retention, Timestamp};
use crate::validate::{validate_policy, RuleId, ValidationReport};
use crate::vocab::{DataCategory, Direction, Frequency, Linkage, Purpose, Security, Storage};

/// Placeholder written into `issued_at` until resolved.
pub const TODO_TIMESTAMP: &str = "TODO";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Permission {
    Location,
    Contacts,
    Internet,
    Sms,
    Camera,
    Microphone,
    Calendar,
    Storage,
    /// A permission name outside the known set, kept verbatim.
    Unmapped(String),
}

impl Permission {
    pub const KNOWN: [Permission; 8] = [
        Permission::Location,
        Permission::Contacts,
        Permission::Internet,
        Permission::Sms,
        Permission::Camera,
        Permission::Microphone,
        Permission::Calendar,
        Permission::Storage,
    ];

    pub fn name(&self) -> &str {
        match self {
            Permission::Location => "LOCATION",
            Permission::Contacts => "CONTACTS",
            Permission::Internet => "INTERNET",
            Permission::Sms => "SMS",
            Permission::Camera => "CAMERA",
            Permission::Microphone => "MICROPHONE",
            Permission::Calendar => "CALENDAR",
            Permission::Storage => "STORAGE",
            Permission::Unmapped(name) => name,
        }
    }

    pub fn from_name(name: &str) -> Self {
        Self::KNOWN
            .iter()
            .find(|p| p.name() == name)
            .cloned()
            .unwrap_or_else(|| Permission::Unmapped(name.to_string()))
    }

    /// Data category a permission grants access to. `INTERNET` grants none;
    /// it signals possible outbound flows instead.
    pub fn category(&self) -> Option<DataCategory> {
        match self {
            Permission::Location => Some(DataCategory::Location),
            Permission::Contacts => Some(DataCategory::Contacts),
            Permission::Sms => Some(DataCategory::Messages),
            Permission::Camera | Permission::Microphone | Permission::Storage => Some(DataCategory::Media),
            Permission::Calendar => Some(DataCategory::Calendar),
            Permission::Internet | Permission::Unmapped(_) => None,
        }
    }
}

impl fmt::Display for Permission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Permission {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Permission {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(|s| Permission::from_name(&s))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermissionManifest {
    pub permissions: BTreeSet<Permission>,
}

impl PermissionManifest {
    pub fn new(permissions: impl IntoIterator<Item = Permission>) -> Self {
        Self { permissions: permissions.into_iter().collect() }
    }

    pub fn contains(&self, permission: &Permission) -> bool {
        self.permissions.contains(permission)
    }

    pub fn unmapped(&self) -> impl Iterator<Item = &str> {
        self.permissions.iter().filter_map(|p| match p {
            Permission::Unmapped(name) => Some(name.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TodoField {
    Version,
    IssuedAt,
    Purposes,
    Frequency,
    Storage,
    Retention,
    Linkage,
    Security,
    OutboundFlows,
}

/// A field the developer still has to fill in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Todo {
    pub category: Option<DataCategory>,
    pub field: TodoField,
}

impl Todo {
    pub fn locator(&self) -> String {
        let field = match self.field {
            TodoField::Version => "version",
            TodoField::IssuedAt => "issued_at",
            TodoField::Purposes => "purposes",
            TodoField::Frequency => "frequency",
            TodoField::Storage => "storage",
            TodoField::Retention => "retention_days",
            TodoField::Linkage => "linkage",
            TodoField::Security => "security",
            TodoField::OutboundFlows => "flows",
        };
        match self.category {
            Some(c) => format!("practices[{c}].{field}"),
            None => field.to_string(),
        }
    }

    pub fn note(&self) -> String {
        match (self.field, self.category) {
            (TodoField::Version, _) => "confirm the version (1 for a first publication)".into(),
            (TodoField::IssuedAt, _) => "set the issue time as an RFC 3339 UTC timestamp".into(),
            (TodoField::OutboundFlows, _) => {
                "INTERNET is requested: declare every partner that receives data, or confirm none".into()
            }
            (TodoField::Purposes, Some(c)) => format!("state what {c} data is used for"),
            (TodoField::Frequency, Some(c)) => format!("state how often {c} data is collected"),
            (TodoField::Storage, Some(c)) => format!("state where {c} data is stored"),
            (TodoField::Retention, Some(c)) => format!("state how long {c} data is kept"),
            (TodoField::Linkage, Some(c)) => format!("state how {c} data is linked to the user"),
            (TodoField::Security, Some(c)) => format!("list protections applied to {c} data"),
            (_, None) => "fill in this field".into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "locator": self.locator(), "note": self.note() })
    }
}

/// A value supplied for a [`Todo`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Version(i64),
    IssuedAt(DateTime<Utc>),
    Purposes(BTreeSet<Purpose>),
    Frequency(Frequency),
    Storage(Storage),
    Retention(Retention),
    Linkage(Linkage),
    Security(BTreeSet<Security>),
    /// Outbound flows to declare; empty means the app shares nothing.
    OutboundFlows(Vec<Flow>),
}

impl Resolution {
    fn field(&self) -> TodoField {
        match self {
            Resolution::Version(_) => TodoField::Version,
            Resolution::IssuedAt(_) => TodoField::IssuedAt,
            Resolution::Purposes(_) => TodoField::Purposes,
            Resolution::Frequency(_) => TodoField::Frequency,
            Resolution::Storage(_) => TodoField::Storage,
            Resolution::Retention(_) => TodoField::Retention,
            Resolution::Linkage(_) => TodoField::Linkage,
            Resolution::Security(_) => TodoField::Security,
            Resolution::OutboundFlows(_) => TodoField::OutboundFlows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScaffoldError {
    #[error("party {0:?} is not a lowercase DNS name")]
    InvalidParty(String),
    #[error("no open TODO at {0}")]
    NoSuchTodo(String),
    #[error("value for {0} is outside its vocabulary")]
    InvalidValue(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Draft {
    pub policy: Policy,
    pub todos: BTreeSet<Todo>,
    pub unmapped: Vec<String>,
}

impl Draft {
    pub fn is_complete(&self) -> bool {
        self.todos.is_empty()
    }

    /// Validation of the draft as it stands, with one `TODO` error per open
    /// marker on top of whatever the placeholders trip.
    pub fn report(&self) -> ValidationReport {
        let mut report = validate_policy(&self.policy);
        for todo in &self.todos {
            report.error(RuleId::Todo, todo.locator(), todo.note());
        }
        report
    }

    /// Fill in one TODO. `category` selects the practice for per-practice
    /// fields and must be `None` for document-level ones.
    pub fn resolve(&mut self, category: Option<DataCategory>, value: Resolution) -> Result<(), ScaffoldError> {
        let todo = Todo { category, field: value.field() };
        if !self.todos.contains(&todo) {
            return Err(ScaffoldError::NoSuchTodo(todo.locator()));
        }
        let invalid = || ScaffoldError::InvalidValue(todo.locator());
        let practice = category.and_then(|c| self.policy.practices.iter_mut().find(|p| p.category == c));
        match (value, practice) {
            (Resolution::Version(v), _) if v >= 1 => self.policy.version = v,
            (Resolution::IssuedAt(t), _) => self.policy.issued_at = Timestamp::Utc(t),
            (Resolution::OutboundFlows(flows), _) => {
                let declared = self.policy.declared_categories();
                let ok = flows.iter().all(|f| {
                    f.direction == Direction::Outbound
                        && !f.categories.is_empty()
                        && !f.purposes.is_empty()
                        && is_valid_domain(&f.partner.domain)
                        && f.categories.is_subset(&declared)
                });
                if !ok {
                    return Err(invalid());
                }
                self.policy.flows.extend(flows);
            }
            (Resolution::Purposes(p), Some(practice)) if !p.is_empty() => practice.purposes = p,
            (Resolution::Frequency(f), Some(practice)) => practice.frequency = f,
            (Resolution::Storage(s), Some(practice)) => practice.storage = s,
            (Resolution::Retention(r), Some(practice)) if !matches!(r, Retention::Days(d) if d < 0) => {
                practice.retention = r
            }
            (Resolution::Linkage(l), Some(practice)) => practice.linkage = l,
            (Resolution::Security(s), Some(practice)) => practice.security = s,
            _ => return Err(invalid()),
        }
        self.todos.remove(&todo);
        Ok(())
    }
}

const PRACTICE_FIELDS: [TodoField; 6] = [
    TodoField::Purposes,
    TodoField::Frequency,
    TodoField::Storage,
    TodoField::Retention,
    TodoField::Linkage,
    TodoField::Security,
];

/// Build a draft policy for `party` from the permissions it requests.
pub fn scaffold_from_manifest(manifest: &PermissionManifest, party: &str) -> Result<Draft, ScaffoldError> {
    if !is_valid_domain(party) {
        return Err(ScaffoldError::InvalidParty(party.to_string()));
    }
    let mut policy = Policy::new(party, 1, Timestamp::Unparsed(TODO_TIMESTAMP.into()));
    let mut todos: BTreeSet<Todo> = [
        Todo { category: None, field: TodoField::Version },
        Todo { category: None, field: TodoField::IssuedAt },
    ]
    .into();

    let categories: BTreeSet<DataCategory> = manifest.permissions.iter().filter_map(Permission::category).collect();
    for category in categories {
        policy.practices.push(DataPractice {
            category,
            purposes: BTreeSet::new(),
            frequency: Frequency::Continuous,
            storage: Storage::ThirdPartyServer,
            retention: Retention::Indefinite,
            linkage: Linkage::Named,
            security: BTreeSet::new(),
        });
        todos.extend(PRACTICE_FIELDS.iter().map(|&field| Todo { category: Some(category), field }));
    }
    if manifest.contains(&Permission::Internet) {
        todos.insert(Todo { category: None, field: TodoField::OutboundFlows });
    }
    policy.normalize();

    Ok(Draft { policy, todos, unmapped: manifest.unmapped().map(str::to_string).collect() })
}
