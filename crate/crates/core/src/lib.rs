//! Machine-readable privacy policies (MRPPs) and the tools built on them.
//!
//! - [`codec`], [`validate`], [`diff`], [`scaffold`]: the policy document
//!   itself.
//! - [`graph`], [`badge`]: the multi-party data-sharing graph, one-way
//!   reference audit and transparency badges.
//! - [`preference`], [`rating`], [`alert`], [`catalog`], [`recommend`]: the
//!   user-agent side, matching policies against a person's preferences.

pub mod alert;
pub mod badge;
pub mod canonical;
pub mod catalog;
pub mod codec;
pub mod diff;
pub mod domain;
pub mod graph;
pub mod policy;
pub mod preference;
pub mod rating;
pub mod recommend;
pub mod scaffold;
pub mod validate;
pub mod vocab;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use alert::{alerts_from_update, scan_blacklist, Alert, AlertBody, AlertKind, BreachEvent};
pub use badge::{badge_gap_report, compute_badge, BadgeLevel, GapReport};
pub use catalog::{AppRecord, RatingContext};
pub use codec::{parse_policy, serialize_canonical, ParseError, ParseErrorKind, ParseErrors};
pub use diff::{apply_delta, diff_policies, DiffError, PolicyDelta};
pub use graph::{audit_references, build_graph, sharing_web, EdgeStatus, MrppStatus, SharingGraph};
pub use policy::{DataPractice, Flow, PartyRef, Policy, Retention, Timestamp};
pub use preference::{evaluate_policy, PreferenceProfile, Violation, ViolationKind};
pub use rating::{star_rating, RatingWeights, StarRating};
pub use recommend::recommend_replacements;
pub use scaffold::{scaffold_from_manifest, Draft, Permission, PermissionManifest};
pub use validate::{validate_policy, RuleId, ValidationReport};
pub use vocab::{DataCategory, Direction, Frequency, Linkage, PartyKind, Purpose, Security, Storage};
