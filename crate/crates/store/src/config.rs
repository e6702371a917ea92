//! Tunable ranking constants.

use std::path::Path;

use mrpp_core::{BadgeLevel, RatingWeights};
use serde::{Deserialize, Serialize};

/// Multiplicative search boost per badge level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boosts {
    pub none: f64,
    pub bronze: f64,
    pub gold: f64,
    pub platinum: f64,
}

impl Default for Boosts {
    fn default() -> Self {
        Self { none: 0.0, bronze: 0.05, gold: 0.10, platinum: 0.20 }
    }
}

impl Boosts {
    pub fn boost(&self, badge: BadgeLevel) -> f64 {
        match badge {
            BadgeLevel::None => self.none,
            BadgeLevel::Bronze => self.bronze,
            BadgeLevel::Gold => self.gold,
            BadgeLevel::Platinum => self.platinum,
        }
    }

    /// Boosts must be non-negative and non-decreasing up the badge lattice.
    pub fn check(&self) -> Result<(), String> {
        let ladder = [self.none, self.bronze, self.gold, self.platinum];
        if ladder.iter().any(|b| !b.is_finite() || *b < 0.0) || ladder.windows(2).any(|w| w[0] > w[1]) {
            return Err("badge boosts must be finite, non-negative and non-decreasing".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub boosts: Boosts,
    pub weights: RatingWeights,
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let config: ServiceConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), String> {
        self.boosts.check()?;
        self.weights.check()
    }
}
