//! Transparency badges and the gap report that explains how to earn them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{sharing_web, GraphError, MrppStatus, SharingGraph};

/// `none < bronze < gold < platinum`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BadgeLevel {
    None,
    Bronze,
    Gold,
    Platinum,
}

impl BadgeLevel {
    pub const ALL: [BadgeLevel; 4] = [BadgeLevel::None, BadgeLevel::Bronze, BadgeLevel::Gold, BadgeLevel::Platinum];

    pub fn as_str(self) -> &'static str {
        match self {
            BadgeLevel::None => "none",
            BadgeLevel::Bronze => "bronze",
            BadgeLevel::Gold => "gold",
            BadgeLevel::Platinum => "platinum",
        }
    }
}

impl fmt::Display for BadgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BadgeLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BadgeLevel::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown badge level `{s}`"))
    }
}

pub const PUBLISH_ACTION: &str = "publish a valid MRPP";

/// Parties whose policy status decides whether `party` holds `level`:
/// itself for bronze, plus first-degree recipients for gold, plus the whole
/// outbound web for platinum.
pub fn badge_scope(graph: &SharingGraph, party: &str, level: BadgeLevel) -> Result<BTreeSet<String>, GraphError> {
    graph.require(party)?;
    let mut scope = BTreeSet::new();
    match level {
        BadgeLevel::None => {}
        BadgeLevel::Bronze => {
            scope.insert(party.to_string());
        }
        BadgeLevel::Gold => {
            scope.insert(party.to_string());
            scope.extend(graph.successors(party).map(str::to_string));
        }
        BadgeLevel::Platinum => scope.extend(sharing_web(graph, party)?.into_keys()),
    }
    Ok(scope)
}

fn not_valid(graph: &SharingGraph, scope: BTreeSet<String>) -> BTreeSet<String> {
    scope.into_iter().filter(|d| graph.status(d) != Some(MrppStatus::Valid)).collect()
}

/// Highest badge whose condition holds for `party`.
pub fn compute_badge(graph: &SharingGraph, party: &str) -> Result<BadgeLevel, GraphError> {
    let mut level = BadgeLevel::None;
    for candidate in [BadgeLevel::Bronze, BadgeLevel::Gold, BadgeLevel::Platinum] {
        if !not_valid(graph, badge_scope(graph, party, candidate)?).is_empty() {
            break;
        }
        level = candidate;
    }
    Ok(level)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub party: String,
    pub target_badge: BadgeLevel,
    /// Parties in the target's scope without a valid policy. Includes
    /// `party` itself when its own policy is missing or invalid.
    pub missing_parties: BTreeSet<String>,
    pub self_actions: Vec<String>,
}

impl GapReport {
    pub fn qualifies(&self) -> bool {
        self.missing_parties.is_empty()
    }
}

/// What stands between `party` and `target`.
pub fn badge_gap_report(graph: &SharingGraph, party: &str, target: BadgeLevel) -> Result<GapReport, GraphError> {
    let status = graph.require(party)?;
    let missing_parties = not_valid(graph, badge_scope(graph, party, target)?);
    let mut self_actions = Vec::new();
    if target > BadgeLevel::None && status != MrppStatus::Valid {
        self_actions.push(PUBLISH_ACTION.to_string());
    }
    let partners = missing_parties.iter().filter(|d| *d != party).count();
    if partners > 0 {
        self_actions.push(format!(
            "get a valid MRPP published by, or stop sharing with, {partners} {}",
            if partners == 1 { "party" } else { "parties" }
        ));
    }
    Ok(GapReport { party: party.to_string(), target_badge: target, missing_parties, self_actions })
}
