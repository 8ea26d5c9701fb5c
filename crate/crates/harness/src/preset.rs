//! Experiment presets: a society template, a grid of variations, what to measure and
//! which checks to score.
//!
//! Network sizes, replication counts and parameter values below are desk-scale choices.
//! The source figures do not state them.

use serde::{Deserialize, Serialize};
use socnet::metrics::{AttachmentOptions, DegreeBinning};
use socnet::{AggregationCurve, SocietyConfig, TypeProfile};

use crate::check::{Check, CheckSpec};
use crate::HarnessError;

/// Profile fields a grid point may override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileField {
    AlphaSame,
    AlphaDiff,
    LinkCost,
    CurveScale,
    Opportunism,
    PopShare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Override {
    #[serde(rename = "type")]
    pub type_index: usize,
    pub field: ProfileField,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub label: String,
    #[serde(default)]
    pub overrides: Vec<Override>,
}

/// Per-replication measurements to collect beyond the defaults (bonding, omega and
/// satisfaction at every checkpoint, connectivity and in-degrees at the horizon).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Measures {
    /// Inclusive birth-date range whose EFTs are recorded.
    pub eft_cohort: Option<[u32; 2]>,
    /// Birth date of the agent whose in-degree is tracked every step.
    pub focus_agent: Option<u32>,
    pub betweenness_at: Vec<u32>,
    pub attachment: Option<AttachmentOptions>,
    /// Track omega every step for the structural-hole check.
    pub track_omega: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: String,
    pub description: String,
    /// Acceptance criteria this preset backs.
    pub criteria: Vec<u32>,
    pub society: SocietyConfig,
    pub sweep: Vec<GridPoint>,
    pub checkpoints: Vec<u32>,
    #[serde(default)]
    pub measures: Measures,
    #[serde(default)]
    pub oracles: Vec<CheckSpec>,
    #[serde(default = "all_outputs")]
    pub outputs: Vec<OutputKind>,
}

fn all_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Csv, OutputKind::Json, OutputKind::Svg]
}

impl ExperimentPreset {
    fn error(&self, message: impl Into<String>) -> HarnessError {
        HarnessError::Preset { name: self.name.clone(), message: message.into() }
    }

    /// Society config of one grid point.
    pub fn point_config(&self, idx: usize) -> SocietyConfig {
        let mut cfg = self.society.clone();
        for o in &self.sweep[idx].overrides {
            let Some(p) = cfg.profiles.get_mut(o.type_index) else { continue };
            let slot = match o.field {
                ProfileField::AlphaSame => &mut p.alpha_same,
                ProfileField::AlphaDiff => &mut p.alpha_diff,
                ProfileField::LinkCost => &mut p.link_cost,
                ProfileField::CurveScale => &mut p.curve.scale,
                ProfileField::Opportunism => &mut p.opportunism,
                ProfileField::PopShare => &mut p.pop_share,
            };
            *slot = o.value;
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sweep.is_empty() {
            return Err(self.error("sweep grid is empty"));
        }
        let horizon = self.society.horizon;
        let late = |ts: &[u32]| ts.iter().find(|&&t| t > horizon || t == 0).copied();
        if let Some(t) = late(&self.checkpoints).or_else(|| late(&self.measures.betweenness_at)) {
            return Err(self.error(format!("checkpoint {t} outside 1..={horizon}")));
        }
        if let Some(a) = &self.measures.attachment {
            if a.checkpoints.iter().any(|&t| t + a.window > horizon) {
                return Err(self.error("attachment window runs past the horizon"));
            }
        }
        if let Some(i) = self.measures.focus_agent {
            if i < 2 || i > horizon {
                return Err(self.error(format!("focus agent {i} outside 2..={horizon}")));
            }
        }
        for (idx, point) in self.sweep.iter().enumerate() {
            if let Some(o) = point.overrides.iter().find(|o| o.type_index >= self.society.type_count()) {
                return Err(self.error(format!("{}: override names missing type {}", point.label, o.type_index)));
            }
            self.point_config(idx).validate()?;
        }
        for spec in &self.oracles {
            if let Some(p) = spec.check.points().into_iter().find(|&p| p >= self.sweep.len()) {
                return Err(self.error(format!("check refers to missing grid point {p}")));
            }
        }
        Ok(())
    }

    /// Multiplies the replication count, keeping at least one.
    pub fn scaled(mut self, factor: f64) -> Self {
        let reps = (self.society.replication_count as f64 * factor).round();
        self.society.replication_count = reps.clamp(1.0, u32::MAX as f64) as u32;
        self
    }
}

fn profile(cost: f64, alpha_diff: f64, opportunism: f64, pop_share: f64) -> TypeProfile {
    TypeProfile {
        alpha_same: 1.0,
        alpha_diff,
        link_cost: cost,
        curve: AggregationCurve::sqrt(1.0),
        opportunism,
        pop_share,
    }
}

// Calibrated on the sqrt curve with unit scale and alpha_same = 1:
// cost 0.3 -> L* = 3, 0.25 -> 4, 0.22 -> 5, 0.2 -> 6; alpha_diff 0.7 with cost 0.3 -> h = 1/3.
const L3: f64 = 0.3;
const L4: f64 = 0.25;
const L5: f64 = 0.22;
const L6: f64 = 0.2;
const THIRD: f64 = 0.7;

const SEED: u64 = 20_240_611;

fn point(label: &str, overrides: &[(usize, ProfileField, f64)]) -> GridPoint {
    GridPoint {
        label: label.into(),
        overrides: overrides
            .iter()
            .map(|&(type_index, field, value)| Override { type_index, field, value })
            .collect(),
    }
}

fn spec(criterion: u32, check: Check) -> CheckSpec {
    CheckSpec { criterion, check }
}

struct Draft {
    name: &'static str,
    description: &'static str,
    criteria: Vec<u32>,
    profiles: Vec<TypeProfile>,
    horizon: u32,
    reps: u32,
    sweep: Vec<GridPoint>,
    checkpoints: Vec<u32>,
    measures: Measures,
    oracles: Vec<CheckSpec>,
}

impl Draft {
    fn build(self) -> ExperimentPreset {
        ExperimentPreset {
            name: self.name.into(),
            description: self.description.into(),
            criteria: self.criteria,
            society: SocietyConfig::new(self.profiles, self.horizon, SEED, self.reps),
            sweep: self.sweep,
            checkpoints: self.checkpoints,
            measures: self.measures,
            oracles: self.oracles,
            outputs: all_outputs(),
        }
    }
}

use ProfileField::*;

const NAMES: &[&str] = &[
    "thm1", "eeft", "fig3a", "fig3b", "fig3c", "fig4", "fig5", "pa", "fig6", "connect", "fig8a", "fig8b",
    "fig8c", "fig9", "fig11",
];

pub fn builtin_names() -> &'static [&'static str] {
    NAMES
}

pub fn builtin(name: &str) -> Option<ExperimentPreset> {
    let eft_measures = |lo, hi| Measures { eft_cohort: Some([lo, hi]), ..Measures::default() };
    let betweenness = Measures { betweenness_at: vec![250, 500, 1000], ..Measures::default() };
    let draft = match name {
        "thm1" => Draft {
            name: "thm1",
            description: "Tolerant two-type society: every satisfied agent forms its ego network in exactly L*(0) rounds",
            criteria: vec![1],
            profiles: vec![profile(L3, 1.0, 0.5, 0.5), profile(L5, 1.0, 0.5, 0.5)],
            horizon: 2000,
            reps: 20,
            sweep: vec![point("h=0", &[])],
            checkpoints: vec![500, 1000, 2000],
            measures: eft_measures(2, 2000),
            oracles: vec![spec(1, Check::DeterministicEft { point: 0 })],
        },
        "eeft" => Draft {
            name: "eeft",
            description: "Fully homophilous two-type society, p = 0.5, gamma = 0.5, L*(0) = 5: EEFT and EFT pmf",
            criteria: vec![2, 3],
            profiles: vec![profile(L5, 0.0, 0.5, 0.5), profile(L5, 0.0, 0.5, 0.5)],
            horizon: 5000,
            reps: 300,
            sweep: vec![point("h=1", &[])],
            checkpoints: vec![1000, 5000],
            measures: eft_measures(1000, 4800),
            oracles: vec![
                spec(2, Check::Eeft { point: 0, type_index: 0, rel_tol: 0.03 }),
                spec(3, Check::EftPmf { point: 0, type_index: 0, max_tv: 0.05 }),
            ],
        },
        "fig3a" => Draft {
            name: "fig3a",
            description: "Impact of homophily on formation time: the same society with h = 0 and h = 1",
            criteria: vec![1, 2],
            profiles: vec![profile(L4, 1.0, 0.5, 0.5), profile(L4, 1.0, 0.5, 0.5)],
            horizon: 3000,
            reps: 50,
            sweep: vec![point("h=0", &[]), point("h=1", &[(0, AlphaDiff, 0.0), (1, AlphaDiff, 0.0)])],
            checkpoints: vec![1000, 3000],
            measures: eft_measures(500, 2800),
            oracles: vec![
                spec(1, Check::DeterministicEft { point: 0 }),
                spec(2, Check::Eeft { point: 1, type_index: 0, rel_tol: 0.03 }),
            ],
        },
        "fig3b" => Draft {
            name: "fig3b",
            description: "EFT distribution of type 1 for gamma_1 = 0 and gamma_1 = 1",
            criteria: vec![4],
            profiles: vec![profile(L4, 0.0, 0.0, 0.5), profile(L4, 0.0, 0.5, 0.5)],
            horizon: 3000,
            reps: 100,
            sweep: vec![point("gamma1=0", &[]), point("gamma1=1", &[(0, Opportunism, 1.0)])],
            checkpoints: vec![1000, 3000],
            measures: eft_measures(500, 2800),
            oracles: vec![spec(4, Check::EftOrdering { a: 0, b: 1, type_index: 0 })],
        },
        "fig3c" => Draft {
            name: "fig3c",
            description: "EFT distribution of type 1 as its gregariousness and population share change",
            criteria: vec![4],
            profiles: vec![profile(L4, 0.0, 0.5, 0.5), profile(L4, 0.0, 0.5, 0.5)],
            horizon: 3000,
            reps: 100,
            sweep: vec![
                point("base", &[]),
                point("L1=6", &[(0, LinkCost, L6)]),
                point("p1=0.7", &[(0, PopShare, 0.7), (1, PopShare, 0.3)]),
            ],
            checkpoints: vec![1000, 3000],
            measures: eft_measures(500, 2800),
            oracles: vec![
                spec(4, Check::EftOrdering { a: 1, b: 0, type_index: 0 }),
                spec(4, Check::EftOrdering { a: 2, b: 0, type_index: 0 }),
            ],
        },
        "fig4" => Draft {
            name: "fig4",
            description: "Average utility against homophily; structural holes when every type has h = 1",
            criteria: vec![5],
            profiles: vec![profile(L3, 0.0, 0.5, 0.5), profile(L3, 0.0, 0.5, 0.5)],
            horizon: 3000,
            reps: 100,
            sweep: vec![
                point("h=1", &[]),
                point("h=2/5", &[(0, AlphaDiff, THIRD), (1, AlphaDiff, THIRD), (0, LinkCost, L4), (1, LinkCost, L4)]),
                point("h=1/3", &[(0, AlphaDiff, THIRD), (1, AlphaDiff, THIRD)]),
                point("h=0", &[(0, AlphaDiff, 1.0), (1, AlphaDiff, 1.0)]),
            ],
            checkpoints: vec![500, 1000, 2000, 3000],
            measures: Measures { track_omega: true, ..Measures::default() },
            oracles: vec![
                spec(5, Check::StructuralHoles { point: 0 }),
                spec(5, Check::BondingOptimum { point: 0, rel_tol: 0.02 }),
                spec(5, Check::BondingOptimum { point: 1, rel_tol: 0.02 }),
                spec(5, Check::BondingOptimum { point: 2, rel_tol: 0.02 }),
                spec(5, Check::BondingOptimum { point: 3, rel_tol: 0.02 }),
            ],
        },
        "fig5" => Draft {
            name: "fig5",
            description: "Popularity of the agent born at t = 10 with gamma = 0 and gamma = 1 in a tolerant society",
            criteria: vec![7, 8, 9],
            profiles: vec![profile(L4, 1.0, 0.0, 1.0)],
            horizon: 3000,
            reps: 300,
            sweep: vec![point("gamma=0", &[]), point("gamma=1", &[(0, Opportunism, 1.0)])],
            checkpoints: vec![1000, 3000],
            measures: Measures { focus_agent: Some(10), ..Measures::default() },
            oracles: vec![
                spec(7, Check::LogPopularity { point: 0, rel_tol: 0.10 }),
                spec(8, Check::SublinearBound { point: 1, z: 3.0 }),
                spec(9, Check::Crossover { slow: 0, fast: 1 }),
            ],
        },
        "pa" => Draft {
            name: "pa",
            description: "Emergent preferential attachment under full opportunism",
            criteria: vec![10],
            profiles: vec![profile(L4, 1.0, 1.0, 1.0)],
            horizon: 1100,
            reps: 200,
            sweep: vec![point("gamma=1", &[])],
            checkpoints: vec![250, 500, 1000],
            measures: Measures {
                attachment: Some(AttachmentOptions {
                    checkpoints: vec![250, 500, 1000],
                    window: 100,
                    min_bin_samples: 200,
                    binning: DegreeBinning::PowersOfTwo,
                }),
                ..Measures::default()
            },
            oracles: vec![spec(10, Check::PreferentialAttachment { point: 0, min_fraction: 0.9 })],
        },
        "fig6" => Draft {
            name: "fig6",
            description: "Popularity inequality between intolerant types with L*(0) = 3 and 6",
            criteria: vec![11],
            profiles: vec![profile(L3, 0.0, 0.5, 0.5), profile(L6, 0.0, 0.5, 0.5)],
            horizon: 3000,
            reps: 50,
            sweep: vec![point("L=3,6", &[])],
            checkpoints: vec![1000, 3000],
            measures: Measures::default(),
            oracles: vec![spec(11, Check::PopularityOrdering { point: 0, higher: 1, lower: 0 })],
        },
        "connect" => Draft {
            name: "connect",
            description: "One tolerant type among two intolerant ones connects the network; the all-intolerant control never does",
            criteria: vec![6],
            profiles: vec![profile(L3, 0.0, 0.5, 0.4), profile(L3, 0.0, 0.5, 0.3), profile(L3, THIRD, 0.5, 0.3)],
            horizon: 2000,
            reps: 200,
            sweep: vec![point("h3=1/3", &[]), point("control", &[(2, AlphaDiff, 0.0)])],
            checkpoints: vec![500, 1000, 2000],
            measures: Measures::default(),
            oracles: vec![
                spec(6, Check::Connectedness { point: 0, min_fraction: 0.99 }),
                spec(6, Check::Connectedness { point: 1, min_fraction: 0.99 }),
            ],
        },
        "fig8a" => Draft {
            name: "fig8a",
            description: "Average betweenness against gregariousness: two intolerant types with L*(0) = 3 and 6",
            criteria: vec![13],
            profiles: vec![profile(L3, 0.0, 0.5, 0.5), profile(L6, 0.0, 0.5, 0.5)],
            horizon: 1000,
            reps: 50,
            sweep: vec![point("L=3,6", &[])],
            checkpoints: vec![250, 500, 1000],
            measures: betweenness.clone(),
            oracles: vec![spec(13, Check::BetweennessOrdering { point: 0, higher: 0, lower: 1 })],
        },
        "fig8b" => Draft {
            name: "fig8b",
            description: "Average betweenness against population share: intolerant types with shares 0.3 and 0.7",
            criteria: vec![13],
            profiles: vec![profile(L4, 0.0, 0.5, 0.3), profile(L4, 0.0, 0.5, 0.7)],
            horizon: 1000,
            reps: 50,
            sweep: vec![point("p=0.3,0.7", &[])],
            checkpoints: vec![250, 500, 1000],
            measures: betweenness.clone(),
            oracles: vec![spec(13, Check::BetweennessOrdering { point: 0, higher: 1, lower: 0 })],
        },
        "fig8c" => Draft {
            name: "fig8c",
            description: "Average betweenness against opportunism: intolerant types with gamma = 0 and 1",
            criteria: vec![13],
            profiles: vec![profile(L4, 0.0, 0.0, 0.5), profile(L4, 0.0, 1.0, 0.5)],
            horizon: 1000,
            reps: 50,
            sweep: vec![point("gamma=0,1", &[])],
            checkpoints: vec![250, 500, 1000],
            measures: betweenness.clone(),
            oracles: vec![spec(13, Check::BetweennessOrdering { point: 0, higher: 0, lower: 1 })],
        },
        "fig9" => Draft {
            name: "fig9",
            description: "Structural-hole filling: two intolerant opportunistic types and a tolerant minority (h = 1/3)",
            criteria: vec![14],
            profiles: vec![profile(L3, 0.0, 1.0, 0.4), profile(L3, 0.0, 1.0, 0.4), profile(L3, THIRD, 0.0, 0.2)],
            horizon: 1000,
            reps: 50,
            sweep: vec![
                point("gamma3=0", &[]),
                point("gamma3=0.1", &[(2, Opportunism, 0.1)]),
                point("gamma3=1", &[(2, Opportunism, 1.0)]),
            ],
            checkpoints: vec![250, 500, 1000],
            measures: betweenness.clone(),
            oracles: vec![
                spec(14, Check::BetweennessOrdering { point: 0, higher: 2, lower: 0 }),
                spec(14, Check::BetweennessOrdering { point: 0, higher: 2, lower: 1 }),
                spec(14, Check::HubMarginDrop { strong: 0, weak: 2, type_index: 2 }),
            ],
        },
        "fig11" => Draft {
            name: "fig11",
            description: "Dominant coalition: an intolerant type among two tolerant ones (h = 1/3)",
            criteria: vec![14],
            profiles: vec![
                profile(L3, THIRD, 0.5, 1.0 / 3.0),
                profile(L3, THIRD, 0.5, 1.0 / 3.0),
                profile(L3, 0.0, 0.5, 1.0 / 3.0),
            ],
            horizon: 1000,
            reps: 50,
            sweep: vec![point("h=1/3,1/3,1", &[])],
            checkpoints: vec![250, 500, 1000],
            measures: betweenness,
            oracles: vec![
                spec(14, Check::BetweennessOrdering { point: 0, higher: 2, lower: 0 }),
                spec(14, Check::BetweennessOrdering { point: 0, higher: 2, lower: 1 }),
            ],
        },
        _ => return None,
    };
    Some(draft.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_valid_and_declares_criteria() {
        for name in builtin_names() {
            let p = builtin(name).unwrap();
            assert_eq!(&p.name, name);
            p.validate().unwrap();
            assert!(!p.criteria.is_empty(), "{name}");
            for s in &p.oracles {
                assert!(p.criteria.contains(&s.criterion), "{name}");
            }
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn calibrated_targets() {
        let fig4 = builtin("fig4").unwrap();
        let h: Vec<f64> = (0..4).map(|i| fig4.point_config(i).profiles[0].homophily_index()).collect();
        assert_eq!(h[0], 1.0);
        assert!((h[1] - 0.4).abs() < 1e-15);
        assert!((h[2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(h[3], 0.0);
        let fig8a = builtin("fig8a").unwrap();
        let l: Vec<u32> = fig8a.society.profiles.iter().map(|p| p.base_gregariousness()).collect();
        assert_eq!(l, [3, 6]);
        let eeft = builtin("eeft").unwrap();
        assert_eq!(eeft.society.profiles[0].base_gregariousness(), 5);
    }

    #[test]
    fn fig3a_compares_h0_with_h1() {
        let p = builtin("fig3a").unwrap();
        assert_eq!(p.point_config(0).profiles[0].homophily_index(), 0.0);
        assert_eq!(p.point_config(1).profiles[1].homophily_index(), 1.0);
    }

    #[test]
    fn scaling_keeps_one_replication() {
        let p = builtin("fig8a").unwrap().scaled(0.001);
        assert_eq!(p.society.replication_count, 1);
    }

    #[test]
    fn checkpoints_past_horizon_rejected() {
        let mut p = builtin("fig6").unwrap();
        p.checkpoints.push(10_000);
        assert!(matches!(p.validate(), Err(HarnessError::Preset { .. })));
    }
}
