//! Replacement suggestions for an app that conflicts with a profile.

use serde::Serialize;

use crate::badge::{compute_badge, BadgeLevel};
use crate::catalog::{AppRecord, RatingContext};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub app_id: String,
    pub raw_rating: f64,
    pub badge: BadgeLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecommendError {
    #[error("app {0} is not in the catalog")]
    UnknownApp(String),
}

/// Same-category alternatives to `target_app`, best first: rating
/// descending, then badge descending, then `app_id`. Apps rated 0 are
/// never suggested.
pub fn recommend_replacements(
    target_app: &str,
    catalog: &[AppRecord],
    ctx: &RatingContext<'_>,
) -> Result<Vec<Recommendation>, RecommendError> {
    let target = catalog
        .iter()
        .find(|a| a.app_id == target_app)
        .ok_or_else(|| RecommendError::UnknownApp(target_app.to_string()))?;

    let mut out: Vec<Recommendation> = catalog
        .iter()
        .filter(|a| a.app_id != target.app_id && a.store_category == target.store_category)
        .map(|a| Recommendation {
            app_id: a.app_id.clone(),
            raw_rating: ctx.raw_rating(a),
            badge: if ctx.graph.contains(&a.party) {
                compute_badge(ctx.graph, &a.party).unwrap_or(BadgeLevel::None)
            } else {
                BadgeLevel::None
            },
        })
        .filter(|r| r.raw_rating > 0.0)
        .collect();

    out.sort_by(|a, b| {
        b.raw_rating
            .total_cmp(&a.raw_rating)
            .then(b.badge.cmp(&a.badge))
            .then_with(|| a.app_id.cmp(&b.app_id))
    });
    Ok(out)
}
