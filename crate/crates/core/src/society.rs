//! Society-wide configuration and its validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::utility::TypeProfile;

/// Index into the ordered list of type profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeId(pub usize);

/// How a uniform ("stranger") draw treats agents already followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeetingPolicy {
    /// Strangers are drawn among agents that are neither self nor a current followee.
    #[default]
    ExcludeFollowees,
    /// Strangers are drawn among all other agents; hitting a followee wastes the round.
    ConsumeRedundant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocietyConfig {
    pub profiles: Vec<TypeProfile>,
    pub horizon: u32,
    pub seed: u64,
    pub replication_count: u32,
    #[serde(default)]
    pub meeting_policy: MeetingPolicy,
}

/// One violated invariant, located by a field path such as `profiles[1].pop_share`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("invalid society config:\n{}", render(.0))]
pub struct ConfigError(pub Vec<Violation>);

fn render(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  - {x}")).collect::<Vec<_>>().join("\n")
}

pub const SHARE_TOLERANCE: f64 = 1e-12;

impl SocietyConfig {
    pub fn new(profiles: Vec<TypeProfile>, horizon: u32, seed: u64, replication_count: u32) -> Self {
        Self { profiles, horizon, seed, replication_count, meeting_policy: MeetingPolicy::default() }
    }

    pub fn type_count(&self) -> usize {
        self.profiles.len()
    }

    pub fn profile(&self, ty: TypeId) -> &TypeProfile {
        &self.profiles[ty.0]
    }

    /// Collects every violated invariant instead of stopping at the first.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: String, message: String| out.push(Violation { field, message });
        if self.profiles.is_empty() {
            push("profiles".into(), "at least one type profile is required".into());
        }
        if self.horizon < 2 {
            push("horizon".into(), format!("must be at least 2, got {}", self.horizon));
        }
        if self.replication_count == 0 {
            push("replication_count".into(), "must be positive".into());
        }
        for (k, p) in self.profiles.iter().enumerate() {
            let at = |name: &str| format!("profiles[{k}].{name}");
            if !(p.alpha_same > 0.0 && p.alpha_same.is_finite()) {
                push(at("alpha_same"), format!("must be positive and finite, got {}", p.alpha_same));
            }
            if !(p.alpha_diff >= 0.0 && p.alpha_diff.is_finite()) {
                push(at("alpha_diff"), format!("must be non-negative and finite, got {}", p.alpha_diff));
            } else if p.alpha_diff > p.alpha_same {
                push(
                    at("alpha_diff"),
                    format!("must not exceed alpha_same ({} > {})", p.alpha_diff, p.alpha_same),
                );
            }
            if !(p.link_cost > 0.0 && p.link_cost.is_finite()) {
                push(at("link_cost"), format!("must be positive and finite, got {}", p.link_cost));
            }
            if !(p.curve.scale > 0.0 && p.curve.scale.is_finite()) {
                push(at("curve.scale"), format!("must be positive and finite, got {}", p.curve.scale));
            }
            if !(0.0..=1.0).contains(&p.opportunism) {
                push(at("opportunism"), format!("must lie in [0, 1], got {}", p.opportunism));
            }
            if !(0.0..=1.0).contains(&p.pop_share) {
                push(at("pop_share"), format!("must lie in [0, 1], got {}", p.pop_share));
            }
        }
        if !self.profiles.is_empty() {
            let total: f64 = self.profiles.iter().map(|p| p.pop_share).sum();
            if (total - 1.0).abs() > SHARE_TOLERANCE {
                push("profiles[*].pop_share".into(), format!("shares must sum to 1, got {total}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(v))
        }
    }

    /// Mean gregariousness `sum_k p_k L*_k(0)`.
    pub fn mean_gregariousness(&self) -> f64 {
        self.profiles.iter().map(|p| p.pop_share * p.base_gregariousness() as f64).sum()
    }

    /// Per-type `(L*(0), h)` echo used when loading configs.
    pub fn derived(&self) -> Vec<DerivedType> {
        self.profiles
            .iter()
            .enumerate()
            .map(|(k, p)| DerivedType {
                type_id: TypeId(k),
                gregariousness: p.base_gregariousness(),
                max_cross_links: p.max_cross_links(0.0),
                homophily: p.homophily_index(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedType {
    pub type_id: TypeId,
    pub gregariousness: u32,
    pub max_cross_links: u32,
    pub homophily: f64,
}
