//! Empirical check that higher in-degree begets stochastically larger in-degree gains.

use serde::{Deserialize, Serialize};

use super::pmf::{fosd_test, Dominance, EmpiricalPmf};
use super::MetricsError;
use crate::graph::{AgentId, EvolvingGraph};

/// How raw in-degree values are grouped before sparse groups are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeBinning {
    /// One base bin per degree value.
    #[default]
    Exact,
    /// Base bins `{0}, {1}, [2, 3], [4, 7], ...`.
    PowersOfTwo,
}

impl DegreeBinning {
    fn key(self, degree: u32) -> u32 {
        match self {
            DegreeBinning::Exact => degree,
            DegreeBinning::PowersOfTwo => 32 - degree.leading_zeros(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentOptions {
    pub checkpoints: Vec<u32>,
    /// Increments are counted over `(t, t + window]`.
    pub window: u32,
    pub min_bin_samples: usize,
    #[serde(default)]
    pub binning: DegreeBinning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeBin {
    /// Inclusive in-degree range at the checkpoint.
    pub lo: u32,
    pub hi: u32,
    /// True when sparse base bins were pooled into this one.
    pub merged: bool,
    pub increments: EmpiricalPmf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointBins {
    pub t: u32,
    pub bins: Vec<DegreeBin>,
    /// For each adjacent pair, the verdict with the higher-degree bin as `a`.
    pub verdicts: Vec<Dominance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentReport {
    pub checkpoints: Vec<CheckpointBins>,
    /// Share of adjacent bin pairs, over all checkpoints, where the higher bin dominates.
    pub ordered_fraction: f64,
}

/// `(in-degree at t, gain over the window)` for every agent alive at `t`.
pub fn degree_increments(g: &EvolvingGraph, t: u32, window: u32) -> Vec<(u32, u32)> {
    let end = t.saturating_add(window);
    (1..=t.min(g.t()))
        .map(AgentId)
        .map(|id| {
            let dates: Vec<u32> = g.follower_dates(id).collect();
            let before = dates.partition_point(|&d| d <= t);
            let after = dates.partition_point(|&d| d <= end);
            (before as u32, (after - before) as u32)
        })
        .collect()
}

fn bin(mut pairs: Vec<(u32, u32)>, min: usize, binning: DegreeBinning) -> Vec<DegreeBin> {
    pairs.sort_unstable();
    // (lo, hi, start, end, base bins)
    let mut groups: Vec<(u32, u32, usize, usize, usize)> = Vec::new();
    let mut start = 0;
    while start < pairs.len() {
        let lo = pairs[start].0;
        let mut end = start;
        let mut parts = 0;
        loop {
            let key = binning.key(pairs[end].0);
            while end < pairs.len() && binning.key(pairs[end].0) == key {
                end += 1;
            }
            parts += 1;
            if end - start >= min || end == pairs.len() {
                break;
            }
        }
        groups.push((lo, pairs[end - 1].0, start, end, parts));
        start = end;
    }
    if groups.len() > 1 && groups.last().is_some_and(|g| g.3 - g.2 < min) {
        let (_, hi, _, end, parts) = groups.pop().unwrap();
        let prev = groups.last_mut().unwrap();
        prev.1 = hi;
        prev.3 = end;
        prev.4 += parts;
    }
    groups
        .into_iter()
        .map(|(lo, hi, s, e, parts)| DegreeBin {
            lo,
            hi,
            merged: parts > 1,
            increments: EmpiricalPmf::from_samples(pairs[s..e].iter().map(|p| p.1 as u64))
                .expect("bins are nonempty"),
        })
        .collect()
}

/// Pools `(degree, gain)` pairs per checkpoint across graphs, bins by degree and tests
/// each adjacent pair of bins for dominance at tolerance `2/sqrt(n)`.
pub fn preferential_attachment_check(
    graphs: &[&EvolvingGraph],
    options: &AttachmentOptions,
) -> Result<AttachmentReport, MetricsError> {
    let pooled = options.checkpoints.iter().map(|&t| {
        let pairs = graphs
            .iter()
            .filter(|g| t + options.window <= g.t())
            .flat_map(|g| degree_increments(g, t, options.window))
            .collect();
        (t, pairs)
    });
    attachment_from_increments(pooled, options)
}

/// Same check on pairs already pooled per checkpoint.
pub fn attachment_from_increments<I>(pooled: I, options: &AttachmentOptions) -> Result<AttachmentReport, MetricsError>
where
    I: IntoIterator<Item = (u32, Vec<(u32, u32)>)>,
{
    let mut checkpoints = Vec::new();
    let (mut ordered, mut total) = (0usize, 0usize);
    for (t, pairs) in pooled {
        if pairs.is_empty() {
            continue;
        }
        let bins = bin(pairs, options.min_bin_samples.max(1), options.binning);
        let verdicts: Vec<Dominance> = bins
            .windows(2)
            .map(|w| {
                let (lower, higher) = (&w[0].increments, &w[1].increments);
                fosd_test(higher, lower, higher.default_tolerance(lower))
            })
            .collect();
        ordered += verdicts.iter().filter(|&&v| v == Dominance::ADominates).count();
        total += verdicts.len();
        checkpoints.push(CheckpointBins { t, bins, verdicts });
    }
    if checkpoints.is_empty() {
        return Err(MetricsError::Empty);
    }
    let ordered_fraction = if total == 0 { 1.0 } else { ordered as f64 / total as f64 };
    Ok(AttachmentReport { checkpoints, ordered_fraction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::society::TypeId;

    fn star_in_progress() -> EvolvingGraph {
        let mut g = EvolvingGraph::new();
        g.add_agent(TypeId(0), false);
        g.add_agent(TypeId(0), false);
        g.add_edge(AgentId(2), AgentId(1)).unwrap();
        g.add_agent(TypeId(0), false);
        g.add_edge(AgentId(3), AgentId(1)).unwrap();
        g
    }

    #[test]
    fn increments_are_windowed() {
        let mut g = star_in_progress();
        g.add_agent(TypeId(0), false);
        g.add_edge(AgentId(4), AgentId(2)).unwrap();
        assert_eq!(degree_increments(&g, 2, 2), vec![(1, 1), (0, 1)]);
    }

    #[test]
    fn sparse_bins_merge() {
        let g = star_in_progress();
        let opts = AttachmentOptions {
            checkpoints: vec![3],
            window: 0,
            min_bin_samples: 2,
            binning: DegreeBinning::Exact,
        };
        let report = preferential_attachment_check(&[&g], &opts).unwrap();
        let bins = &report.checkpoints[0].bins;
        assert_eq!(bins.len(), 1);
        assert!(bins[0].merged);
        assert_eq!((bins[0].lo, bins[0].hi), (0, 2));
        assert_eq!(bins[0].increments.n(), 3);
    }

    #[test]
    fn power_of_two_keys() {
        let keys: Vec<u32> = [0, 1, 2, 3, 4, 7, 8].iter().map(|&d| DegreeBinning::PowersOfTwo.key(d)).collect();
        assert_eq!(keys, [0, 1, 2, 2, 3, 3, 4]);
    }
}
