//! Policy document text format (`.mrpp.json`): parsing and canonical output.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::canonical::{content_hash, to_canonical_string};
use crate::policy::{sorted_names, DataPractice, Flow, PartyRef, Policy, Retention, Timestamp, INDEFINITE};
use crate::vocab::{DataCategory, Direction, Frequency, Linkage, PartyKind, Purpose, Security, Storage, UNKNOWN_VOCABULARY};

/// File extension for policy documents.
pub const POLICY_EXTENSION: &str = ".mrpp.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseErrorKind {
    MalformedDocument,
    UnknownVocabulary,
    MissingField,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::MalformedDocument => "malformed-document",
            ParseErrorKind::UnknownVocabulary => "unknown-vocabulary",
            ParseErrorKind::MissingField => "missing-field",
        }
    }
}

/// One problem found while reading a document, with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseError {
    pub fn locator(&self) -> String {
        format!("line {} column {}", self.line, self.column)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} at {}", self.kind.as_str(), self.message, self.locator())
    }
}

/// Non-empty list of parse errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ParseErrors(pub Vec<ParseError>);

impl ParseErrors {
    pub fn first(&self) -> &ParseError {
        &self.0[0]
    }
}

impl From<serde_json::Error> for ParseError {
    fn from(err: serde_json::Error) -> Self {
        let (line, column) = (err.line(), err.column());
        let full = err.to_string();
        let suffix = format!(" at line {line} column {column}");
        let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
        let kind = if err.is_syntax() || err.is_eof() || err.is_io() {
            ParseErrorKind::MalformedDocument
        } else if message.starts_with(UNKNOWN_VOCABULARY) {
            ParseErrorKind::UnknownVocabulary
        } else if message.starts_with("missing field") {
            ParseErrorKind::MissingField
        } else {
            ParseErrorKind::MalformedDocument
        };
        ParseError { kind, message, line: line.max(1), column: column.max(1) }
    }
}

/// Parse a policy document. Either the whole document is accepted or at
/// least one positioned error is returned.
pub fn parse_policy(text: &str) -> Result<Policy, ParseErrors> {
    let doc: PolicyDoc = serde_json::from_str(text).map_err(|e| ParseErrors(vec![e.into()]))?;
    Ok(doc.into())
}

/// Canonical text of a policy: sorted keys, practices by category name,
/// flows by (direction, partner domain, category list), compact, one LF.
pub fn serialize_canonical(policy: &Policy) -> String {
    to_canonical_string(&policy_to_value(policy))
}

/// SHA-256 of the canonical text, lowercase hex.
pub fn policy_hash(policy: &Policy) -> String {
    content_hash(serialize_canonical(policy).as_bytes())
}

pub fn policy_to_value(policy: &Policy) -> Value {
    let p = policy.normalized();
    let mut obj = Map::new();
    obj.insert("party".into(), json!(p.party));
    if let Some(app_id) = &p.app_id {
        obj.insert("app_id".into(), json!(app_id));
    }
    obj.insert("version".into(), json!(p.version));
    obj.insert("issued_at".into(), json!(p.issued_at.render()));
    obj.insert("practices".into(), Value::Array(p.practices.iter().map(practice_to_value).collect()));
    obj.insert("flows".into(), Value::Array(p.flows.iter().map(flow_to_value).collect()));
    Value::Object(obj)
}

fn names<T: Copy>(set: &BTreeSet<T>, name: fn(T) -> &'static str) -> Value {
    json!(sorted_names(set.iter().map(|v| name(*v))))
}

fn retention_to_value(r: Retention) -> Value {
    match r {
        Retention::Days(d) => json!(d),
        Retention::Indefinite => json!(INDEFINITE),
    }
}

fn practice_to_value(p: &DataPractice) -> Value {
    json!({
        "category": p.category.as_str(),
        "purposes": names(&p.purposes, Purpose::as_str),
        "frequency": p.frequency.as_str(),
        "storage": p.storage.as_str(),
        "retention_days": retention_to_value(p.retention),
        "linkage": p.linkage.as_str(),
        "security": names(&p.security, Security::as_str),
    })
}

fn flow_to_value(f: &Flow) -> Value {
    let mut obj = Map::new();
    obj.insert("direction".into(), json!(f.direction.as_str()));
    obj.insert(
        "partner".into(),
        json!({ "kind": f.partner.kind.as_str(), "domain": f.partner.domain }),
    );
    obj.insert("categories".into(), names(&f.categories, DataCategory::as_str));
    if f.direction == Direction::Outbound {
        obj.insert("purposes".into(), names(&f.purposes, Purpose::as_str));
    }
    Value::Object(obj)
}

// Wire shapes. Field-level errors surface from serde with positions.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyDoc {
    party: String,
    #[serde(default)]
    app_id: Option<String>,
    version: i64,
    issued_at: String,
    practices: Vec<PracticeDoc>,
    flows: Vec<FlowDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PracticeDoc {
    category: DataCategory,
    purposes: Vec<Purpose>,
    frequency: Frequency,
    storage: Storage,
    retention_days: RetentionDoc,
    linkage: Linkage,
    security: Vec<Security>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawFlowDoc")]
struct FlowDoc(Flow);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlowDoc {
    direction: Direction,
    partner: PartnerDoc,
    categories: Vec<DataCategory>,
    #[serde(default)]
    purposes: Option<Vec<Purpose>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartnerDoc {
    kind: PartyKind,
    domain: String,
}

impl TryFrom<RawFlowDoc> for FlowDoc {
    type Error = String;

    fn try_from(raw: RawFlowDoc) -> Result<Self, String> {
        let partner = PartyRef { kind: raw.partner.kind, domain: raw.partner.domain };
        let flow = match (raw.direction, raw.purposes) {
            (Direction::Outbound, Some(purposes)) => Flow::outbound(partner, raw.categories, purposes),
            (Direction::Outbound, None) => return Err("missing field `purposes`".into()),
            (Direction::Inbound, None) => Flow::inbound(partner, raw.categories),
            (Direction::Inbound, Some(_)) => return Err("inbound flows carry no `purposes`".into()),
        };
        Ok(FlowDoc(flow))
    }
}

struct RetentionDoc(Retention);

impl<'de> Deserialize<'de> for RetentionDoc {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RetentionVisitor;

        impl<'de> Visitor<'de> for RetentionVisitor {
            type Value = RetentionDoc;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "an integer day count or \"{INDEFINITE}\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RetentionDoc, E> {
                Ok(RetentionDoc(Retention::Days(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RetentionDoc, E> {
                i64::try_from(v)
                    .map(|d| RetentionDoc(Retention::Days(d)))
                    .map_err(|_| E::custom("retention_days out of range"))
            }

            fn visit_f64<E: de::Error>(self, _: f64) -> Result<RetentionDoc, E> {
                Err(E::custom("retention_days must be an integer"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<RetentionDoc, E> {
                if v == INDEFINITE {
                    Ok(RetentionDoc(Retention::Indefinite))
                } else {
                    Err(E::custom(format!("{UNKNOWN_VOCABULARY} `{v}` for retention")))
                }
            }
        }

        deserializer.deserialize_any(RetentionVisitor)
    }
}

impl From<PolicyDoc> for Policy {
    fn from(doc: PolicyDoc) -> Self {
        Policy {
            party: doc.party,
            app_id: doc.app_id,
            version: doc.version,
            issued_at: Timestamp::parse(&doc.issued_at),
            practices: doc
                .practices
                .into_iter()
                .map(|p| DataPractice {
                    category: p.category,
                    purposes: p.purposes.into_iter().collect(),
                    frequency: p.frequency,
                    storage: p.storage,
                    retention: p.retention_days.0,
                    linkage: p.linkage,
                    security: p.security.into_iter().collect(),
                })
                .collect(),
            flows: doc.flows.into_iter().map(|f| f.0).collect(),
        }
    }
}
