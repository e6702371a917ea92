//! Semantic validation of parsed policies.
//!
//! | rule | checks |
//! |------|--------|
//! | V1 | party domain syntax, `app_id` form |
//! | V2 | at most one practice per category |
//! | V3 | flow partners present and well-formed; outbound categories declared |
//! | V4 | inbound categories declared; inbound flows carry no purposes |
//! | V5 | retention is a non-negative day count or indefinite |
//! | V6 | version ≥ 1 and `issued_at` is a UTC RFC 3339 instant |
//! | V7 | purpose sets are non-empty |
//!
//! Warnings: W1 for bare-domain partners, W2 for indefinite retention.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::domain::{is_valid_app_id, is_valid_domain};
use crate::policy::{Policy, Retention};
use crate::vocab::{Direction, PartyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RuleId {
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    V7,
    W1,
    W2,
    /// An unresolved scaffold placeholder.
    #[serde(rename = "TODO")]
    Todo,
}

impl RuleId {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::V1 => "V1",
            RuleId::V2 => "V2",
            RuleId::V3 => "V3",
            RuleId::V4 => "V4",
            RuleId::V5 => "V5",
            RuleId::V6 => "V6",
            RuleId::V7 => "V7",
            RuleId::W1 => "W1",
            RuleId::W2 => "W2",
            RuleId::Todo => "TODO",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub rule_id: RuleId,
    pub message: String,
    /// Path into the document, e.g. `flows[2].partner.domain`.
    pub locator: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error_rules(&self) -> BTreeSet<RuleId> {
        self.errors.iter().map(|f| f.rule_id).collect()
    }

    pub fn warning_rules(&self) -> BTreeSet<RuleId> {
        self.warnings.iter().map(|f| f.rule_id).collect()
    }

    pub(crate) fn error(&mut self, rule_id: RuleId, locator: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Finding { rule_id, message: message.into(), locator: locator.into() });
    }

    fn warn(&mut self, rule_id: RuleId, locator: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Finding { rule_id, message: message.into(), locator: locator.into() });
    }
}

/// Check every rule against the policy. Never fails; the report is the
/// result.
pub fn validate_policy(policy: &Policy) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !is_valid_domain(&policy.party) {
        report.error(RuleId::V1, "party", format!("party {:?} is not a lowercase DNS name", policy.party));
    }
    if let Some(app_id) = &policy.app_id {
        if !is_valid_app_id(app_id) {
            report.error(RuleId::V1, "app_id", "app_id must be 1-128 printable characters");
        }
    }

    if policy.version < 1 {
        report.error(RuleId::V6, "version", format!("version {} is below 1", policy.version));
    }
    if policy.issued_at.as_utc().is_none() {
        report.error(
            RuleId::V6,
            "issued_at",
            format!("issued_at {:?} is not an RFC 3339 UTC timestamp", policy.issued_at.render()),
        );
    }

    let mut seen = BTreeSet::new();
    for (i, practice) in policy.practices.iter().enumerate() {
        let at = format!("practices[{i}]");
        if !seen.insert(practice.category) {
            report.error(
                RuleId::V2,
                format!("{at}.category"),
                format!("category {} is already described by another practice", practice.category),
            );
        }
        if practice.purposes.is_empty() {
            report.error(RuleId::V7, format!("{at}.purposes"), "practice declares no purposes");
        }
        match practice.retention {
            Retention::Days(d) if d < 0 => {
                report.error(RuleId::V5, format!("{at}.retention_days"), format!("retention of {d} days is negative"));
            }
            Retention::Indefinite => {
                report.warn(
                    RuleId::W2,
                    format!("{at}.retention_days"),
                    format!("{} data is retained indefinitely", practice.category),
                );
            }
            Retention::Days(_) => {}
        }
    }

    let declared = policy.declared_categories();
    for (i, flow) in policy.flows.iter().enumerate() {
        let at = format!("flows[{i}]");
        let rule = match flow.direction {
            Direction::Outbound => RuleId::V3,
            Direction::Inbound => RuleId::V4,
        };
        let domain = &flow.partner.domain;
        if domain.is_empty() {
            report.error(RuleId::V3, format!("{at}.partner.domain"), "flow partner is not named");
        } else if !is_valid_domain(domain) {
            report.error(
                RuleId::V3,
                format!("{at}.partner.domain"),
                format!("partner {domain:?} is not a lowercase DNS name"),
            );
        }
        if flow.categories.is_empty() {
            report.error(rule, format!("{at}.categories"), "flow names no data categories");
        }
        for category in flow.categories.iter().filter(|c| !declared.contains(c)) {
            report.error(
                rule,
                format!("{at}.categories"),
                format!("{} flow carries {category}, which no practice describes", flow.direction),
            );
        }
        match flow.direction {
            Direction::Outbound if flow.purposes.is_empty() => {
                report.error(RuleId::V7, format!("{at}.purposes"), "outbound flow declares no purposes");
            }
            Direction::Inbound if !flow.purposes.is_empty() => {
                report.error(RuleId::V4, format!("{at}.purposes"), "inbound flows carry no purposes");
            }
            _ => {}
        }
        if flow.partner.kind == PartyKind::BareDomain && !domain.is_empty() {
            report.warn(
                RuleId::W1,
                format!("{at}.partner"),
                format!("partner {domain} publishes no policy; the transfer cannot be confirmed"),
            );
        }
    }

    report
}
