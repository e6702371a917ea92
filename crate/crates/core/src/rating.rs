//! Personalized star ratings.
//!
//! `raw = clamp(5 − Σ weights, 0, 5)`; the displayed value is `raw` rounded
//! to the nearest half star, with exact halfway cases rounded down.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::preference::{Violation, ViolationKind};

pub const MAX_STARS: f64 = 5.0;

/// Rating for apps whose policy is unknown: below a clean app, above a
/// violating one.
pub const NEUTRAL_PRIOR: f64 = 2.5;

/// Weight per violation kind. Every weight must be positive so that each
/// additional violation lowers the rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingWeights {
    pub denied_category: f64,
    pub blacklisted_party: f64,
    pub purpose: f64,
    pub retention: f64,
    pub sharing_forbidden: f64,
    pub linkage: f64,
    pub security: f64,
}

impl Default for RatingWeights {
    fn default() -> Self {
        Self {
            denied_category: 2.0,
            blacklisted_party: 2.0,
            purpose: 1.0,
            retention: 1.0,
            sharing_forbidden: 1.0,
            linkage: 0.5,
            security: 0.5,
        }
    }
}

impl RatingWeights {
    pub fn weight(&self, kind: ViolationKind) -> f64 {
        match kind {
            ViolationKind::DeniedCategory => self.denied_category,
            ViolationKind::BlacklistedParty => self.blacklisted_party,
            ViolationKind::Purpose => self.purpose,
            ViolationKind::Retention => self.retention,
            ViolationKind::SharingForbidden => self.sharing_forbidden,
            ViolationKind::Linkage => self.linkage,
            ViolationKind::Security => self.security,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let all = [
            self.denied_category,
            self.blacklisted_party,
            self.purpose,
            self.retention,
            self.sharing_forbidden,
            self.linkage,
            self.security,
        ];
        if all.iter().all(|w| w.is_finite() && *w > 0.0) {
            Ok(())
        } else {
            Err("rating weights must be finite and positive".into())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarRating {
    pub raw: f64,
    pub display: f64,
}

impl StarRating {
    pub fn from_raw(raw: f64) -> Self {
        Self { raw, display: round_half_star(raw) }
    }
}

/// Nearest multiple of 0.5; ties go down.
pub fn round_half_star(raw: f64) -> f64 {
    let halves = raw * 2.0;
    let floor = halves.floor();
    let rounded = if halves - floor > 0.5 { floor + 1.0 } else { floor };
    rounded / 2.0
}

/// Rating with the default weight table.
pub fn star_rating(violations: &[Violation], blacklist_hits: &[(String, usize)]) -> StarRating {
    star_rating_with(&RatingWeights::default(), violations, blacklist_hits)
}

/// Each violation costs its kind's weight; each distinct reachable
/// blacklisted domain costs the blacklist weight once, whatever its
/// distance.
pub fn star_rating_with(
    weights: &RatingWeights,
    violations: &[Violation],
    blacklist_hits: &[(String, usize)],
) -> StarRating {
    let distinct: BTreeSet<&str> = blacklist_hits.iter().map(|(d, _)| d.as_str()).collect();
    let penalty: f64 = violations.iter().map(|v| weights.weight(v.kind)).sum::<f64>()
        + distinct.len() as f64 * weights.blacklisted_party;
    StarRating::from_raw((MAX_STARS - penalty).clamp(0.0, MAX_STARS))
}
