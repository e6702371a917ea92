//! The policy document model.
//!
//! A [`Policy`] is one party's declaration of what it collects, in what
//! context, and with whom it exchanges data. Values here are deliberately
//! permissive: a parsed document may still break the semantic rules checked
//! by [`crate::validate::validate_policy`] (bad party syntax, version 0,
//! undeclared flow categories and so on).

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};

use crate::vocab::{DataCategory, Direction, Frequency, Linkage, PartyKind, Purpose, Security, Storage};

/// Wire token for unbounded retention.
pub const INDEFINITE: &str = "indefinite";

/// A sharing partner: a domain, plus whether it claims to publish a policy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyRef {
    pub kind: PartyKind,
    pub domain: String,
}

impl PartyRef {
    pub fn mrpp(domain: impl Into<String>) -> Self {
        Self { kind: PartyKind::Mrpp, domain: domain.into() }
    }

    pub fn bare(domain: impl Into<String>) -> Self {
        Self { kind: PartyKind::BareDomain, domain: domain.into() }
    }
}

/// How long collected data is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Retention {
    /// A day count. Negative counts are representable so the validator can
    /// report them.
    Days(i64),
    Indefinite,
}

impl Retention {
    /// True when data is kept longer than `max_days`. Indefinite retention
    /// exceeds every finite bound.
    pub fn exceeds(self, max_days: u64) -> bool {
        match self {
            Retention::Indefinite => true,
            Retention::Days(d) => d > 0 && d as u64 > max_days,
        }
    }
}

impl fmt::Display for Retention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Retention::Days(d) => write!(f, "{d} days"),
            Retention::Indefinite => f.write_str(INDEFINITE),
        }
    }
}

/// Issue timestamp. Anything that is not an RFC 3339 instant in UTC is kept
/// verbatim so it survives a round trip and can be flagged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Timestamp {
    Utc(DateTime<Utc>),
    Unparsed(String),
}

impl Timestamp {
    pub fn parse(raw: &str) -> Self {
        match DateTime::parse_from_rfc3339(raw) {
            Ok(dt) if dt.offset().local_minus_utc() == 0 => Timestamp::Utc(dt.with_timezone(&Utc)),
            _ => Timestamp::Unparsed(raw.to_string()),
        }
    }

    pub fn as_utc(&self) -> Option<DateTime<Utc>> {
        match self {
            Timestamp::Utc(dt) => Some(*dt),
            Timestamp::Unparsed(_) => None,
        }
    }

    /// Wire form: UTC instants always end in `Z`, fractional seconds only
    /// when non-zero.
    pub fn render(&self) -> String {
        match self {
            Timestamp::Utc(dt) => dt.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            Timestamp::Unparsed(raw) => raw.clone(),
        }
    }
}

impl From<DateTime<Utc>> for Timestamp {
    fn from(dt: DateTime<Utc>) -> Self {
        Timestamp::Utc(dt)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The context in which one category of data is handled.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DataPractice {
    pub category: DataCategory,
    pub purposes: BTreeSet<Purpose>,
    pub frequency: Frequency,
    pub storage: Storage,
    pub retention: Retention,
    pub linkage: Linkage,
    pub security: BTreeSet<Security>,
}

/// A declared transfer to (outbound) or from (inbound) a partner.
///
/// Inbound flows carry categories only; `purposes` stays empty for them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flow {
    pub direction: Direction,
    pub partner: PartyRef,
    pub categories: BTreeSet<DataCategory>,
    pub purposes: BTreeSet<Purpose>,
}

impl Flow {
    pub fn outbound(
        partner: PartyRef,
        categories: impl IntoIterator<Item = DataCategory>,
        purposes: impl IntoIterator<Item = Purpose>,
    ) -> Self {
        Self {
            direction: Direction::Outbound,
            partner,
            categories: categories.into_iter().collect(),
            purposes: purposes.into_iter().collect(),
        }
    }

    pub fn inbound(partner: PartyRef, categories: impl IntoIterator<Item = DataCategory>) -> Self {
        Self {
            direction: Direction::Inbound,
            partner,
            categories: categories.into_iter().collect(),
            purposes: BTreeSet::new(),
        }
    }

    /// Canonical ordering key: direction, partner domain, sorted category
    /// names, then the remaining fields so the order is total.
    pub(crate) fn sort_key(&self) -> (&'static str, &str, Vec<&'static str>, &'static str, Vec<&'static str>) {
        (
            self.direction.as_str(),
            &self.partner.domain,
            sorted_names(self.categories.iter().map(|c| c.as_str())),
            self.partner.kind.as_str(),
            sorted_names(self.purposes.iter().map(|p| p.as_str())),
        )
    }
}

pub(crate) fn sorted_names(names: impl Iterator<Item = &'static str>) -> Vec<&'static str> {
    let mut v: Vec<_> = names.collect();
    v.sort_unstable();
    v
}

/// One party's machine-readable privacy policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub party: String,
    pub app_id: Option<String>,
    pub version: i64,
    pub issued_at: Timestamp,
    pub practices: Vec<DataPractice>,
    pub flows: Vec<Flow>,
}

impl Policy {
    pub fn new(party: impl Into<String>, version: i64, issued_at: impl Into<Timestamp>) -> Self {
        Self {
            party: party.into(),
            app_id: None,
            version,
            issued_at: issued_at.into(),
            practices: Vec::new(),
            flows: Vec::new(),
        }
    }

    pub fn practice(&self, category: DataCategory) -> Option<&DataPractice> {
        self.practices.iter().find(|p| p.category == category)
    }

    pub fn declared_categories(&self) -> BTreeSet<DataCategory> {
        self.practices.iter().map(|p| p.category).collect()
    }

    pub fn outbound(&self) -> impl Iterator<Item = &Flow> {
        self.flows.iter().filter(|f| f.direction == Direction::Outbound)
    }

    pub fn inbound(&self) -> impl Iterator<Item = &Flow> {
        self.flows.iter().filter(|f| f.direction == Direction::Inbound)
    }

    /// Sort practices and flows into canonical order in place.
    pub fn normalize(&mut self) {
        self.practices.sort_by_key(|p| p.category.as_str());
        self.flows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }

    pub fn normalized(&self) -> Policy {
        let mut p = self.clone();
        p.normalize();
        p
    }

    /// Equality up to the ordering of practices and flows, which carries no
    /// meaning in the document.
    pub fn structurally_eq(&self, other: &Policy) -> bool {
        self.normalized() == other.normalized()
    }
}

impl From<&str> for Timestamp {
    fn from(raw: &str) -> Self {
        Timestamp::parse(raw)
    }
}
