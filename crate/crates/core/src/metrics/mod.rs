//! Measurements of bonding, popularity and bridging capital on evolved graphs.

mod attachment;
mod betweenness;
mod pmf;

pub use attachment::{
    attachment_from_increments, degree_increments, preferential_attachment_check, AttachmentOptions, AttachmentReport, CheckpointBins,
    DegreeBin, DegreeBinning,
};
pub use betweenness::{betweenness, betweenness_undirected};
pub use pmf::{fosd_test, total_variation, Dominance, EmpiricalPmf};

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AgentId, EvolvingGraph};
use crate::society::{SocietyConfig, TypeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no samples")]
    Empty,
    #[error("every agent in the cohort is unsatisfied ({unsatisfied} agents)")]
    AllUnsatisfied { unsatisfied: usize },
    #[error("no agents of type {0:?}")]
    NoAgentsOfType(TypeId),
}

/// EFT values of satisfied agents in a birth cohort plus the count left unsatisfied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EftSample {
    pub values: Vec<u64>,
    pub unsatisfied: usize,
}

impl EftSample {
    pub fn extend(&mut self, other: EftSample) {
        self.values.extend(other.values);
        self.unsatisfied += other.unsatisfied;
    }

    pub fn pmf(&self) -> Result<EmpiricalPmf, MetricsError> {
        if self.values.is_empty() {
            return Err(MetricsError::AllUnsatisfied { unsatisfied: self.unsatisfied });
        }
        EmpiricalPmf::from_samples(self.values.iter().copied())
    }
}

pub fn eft_sample(g: &EvolvingGraph, ty: TypeId, cohort: RangeInclusive<u32>) -> EftSample {
    let mut out = EftSample::default();
    let hi = (*cohort.end()).min(g.t());
    for b in *cohort.start()..=hi {
        let a = g.agent(AgentId(b));
        if a.type_id() != ty {
            continue;
        }
        match a.eft() {
            Some(e) => out.values.push(e as u64),
            None => out.unsatisfied += 1,
        }
    }
    out
}

/// Distribution of EFT over satisfied type-`ty` agents born in `cohort`.
pub fn eft_empirical_pmf(
    g: &EvolvingGraph,
    ty: TypeId,
    cohort: RangeInclusive<u32>,
) -> Result<(EmpiricalPmf, usize), MetricsError> {
    let s = eft_sample(g, ty, cohort);
    Ok((s.pmf()?, s.unsatisfied))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bonding {
    /// Mean utility per type; 0 for types with no agents.
    pub per_type: Vec<f64>,
    pub counts: Vec<usize>,
    /// Mean utility over all agents.
    pub total: f64,
}

pub fn bonding_capital(g: &EvolvingGraph, config: &SocietyConfig) -> Bonding {
    let k = config.type_count();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for a in g.agents() {
        let ty = a.type_id().0;
        sums[ty] += config.profiles[ty].utility(a.n_same(), a.n_diff());
        counts[ty] += 1;
    }
    let total = if g.is_empty() { 0.0 } else { sums.iter().sum::<f64>() / g.len() as f64 };
    let per_type = sums.iter().zip(&counts).map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 }).collect();
    Bonding { per_type, counts, total }
}

/// In-degree of `agent` at every date from its birth through `until`.
pub fn popularity_series(g: &EvolvingGraph, agent: AgentId, until: u32) -> Vec<u32> {
    let dates: Vec<u32> = g.follower_dates(agent).collect();
    (agent.birth()..=until).map(|t| dates.partition_point(|&d| d <= t) as u32).collect()
}

pub fn popularity_distribution(g: &EvolvingGraph, ty: TypeId) -> Result<EmpiricalPmf, MetricsError> {
    let degrees: Vec<u64> =
        g.agent_ids().filter(|&id| g.type_of(id) == ty).map(|id| g.in_degree(id) as u64).collect();
    if degrees.is_empty() {
        return Err(MetricsError::NoAgentsOfType(ty));
    }
    EmpiricalPmf::from_samples(degrees)
}

/// Mean score per type; `None` for a type with no agents.
pub fn avg_betweenness_by_type(g: &EvolvingGraph, scores: &[f64], type_count: usize) -> Vec<Option<f64>> {
    let mut sums = vec![0.0; type_count];
    let mut counts = vec![0usize; type_count];
    for (idx, a) in g.agents().iter().enumerate() {
        sums[a.type_id().0] += scores[idx];
        counts[a.type_id().0] += 1;
    }
    sums.iter().zip(&counts).map(|(s, &c)| (c > 0).then(|| s / c as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalReport {
    pub t: u32,
    pub bonding: Bonding,
    pub popularity: Vec<u32>,
    pub betweenness_by_type: Option<Vec<Option<f64>>>,
    pub omega: usize,
}

pub fn capital_report(g: &EvolvingGraph, config: &SocietyConfig, with_betweenness: bool) -> CapitalReport {
    let betweenness_by_type =
        with_betweenness.then(|| avg_betweenness_by_type(g, &betweenness(g), config.type_count()));
    CapitalReport {
        t: g.t(),
        bonding: bonding_capital(g, config),
        popularity: g.agent_ids().map(|id| g.in_degree(id)).collect(),
        betweenness_by_type,
        omega: g.components_undirected().omega,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::{AggregationCurve, TypeProfile};

    fn config() -> SocietyConfig {
        let p = |share| TypeProfile {
            alpha_same: 1.0,
            alpha_diff: 0.5,
            link_cost: 0.3,
            curve: AggregationCurve::sqrt(2.0),
            opportunism: 0.0,
            pop_share: share,
        };
        SocietyConfig::new(vec![p(0.5), p(0.5)], 10, 0, 1)
    }

    #[test]
    fn empty_graph_has_zero_utility() {
        let b = bonding_capital(&EvolvingGraph::new(), &config());
        assert_eq!(b.total, 0.0);
        assert_eq!(b.per_type, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_utility() {
        let mut g = EvolvingGraph::new();
        for ty in [0, 0, 0, 1] {
            g.add_agent(TypeId(ty), false);
        }
        for to in 2..=4 {
            g.add_edge(AgentId(1), AgentId(to)).unwrap();
        }
        let b = bonding_capital(&g, &config());
        // 2 sqrt(2 + 0.5) - 0.9 for agent 1, zero for the others
        let u1 = 2.0 * 2.5f64.sqrt() - 0.9;
        assert!((b.per_type[0] - u1 / 3.0).abs() < 1e-12);
        assert!((b.total - u1 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn popularity_examples() {
        let mut g = EvolvingGraph::new();
        g.add_agent(TypeId(0), false);
        g.add_agent(TypeId(0), false);
        g.add_agent(TypeId(1), false);
        g.add_edge(AgentId(3), AgentId(1)).unwrap();
        assert_eq!(popularity_series(&g, AgentId(2), 3), vec![0, 0]);
        assert_eq!(popularity_series(&g, AgentId(1), 4), vec![0, 0, 1, 1]);
        let d = popularity_distribution(&g, TypeId(0)).unwrap();
        assert_eq!(d.support(), &[0, 1]);
        assert_eq!(popularity_distribution(&g, TypeId(5)), Err(MetricsError::NoAgentsOfType(TypeId(5))));
        let singles = popularity_distribution(&g, TypeId(1)).unwrap();
        assert_eq!(singles, EmpiricalPmf::point_mass(0));
    }

    #[test]
    fn eft_cohorts() {
        let mut g = EvolvingGraph::new();
        g.add_agent(TypeId(0), true);
        g.add_agent(TypeId(0), false);
        let s = eft_sample(&g, TypeId(0), 1..=2);
        assert_eq!(s.values, vec![0]);
        assert_eq!(s.unsatisfied, 1);
        assert_eq!(eft_empirical_pmf(&g, TypeId(0), 2..=2), Err(MetricsError::AllUnsatisfied { unsatisfied: 1 }));
        let (pmf, _) = eft_empirical_pmf(&g, TypeId(0), 1..=1).unwrap();
        assert_eq!(pmf, EmpiricalPmf::point_mass(0));
    }

    #[test]
    fn single_type_average() {
        let mut g = EvolvingGraph::new();
        for _ in 0..3 {
            g.add_agent(TypeId(0), false);
        }
        g.add_edge(AgentId(1), AgentId(2)).unwrap();
        g.add_edge(AgentId(2), AgentId(3)).unwrap();
        let s = betweenness(&g);
        assert_eq!(avg_betweenness_by_type(&g, &s, 2), vec![Some(1.0 / 3.0), None]);
    }
}
