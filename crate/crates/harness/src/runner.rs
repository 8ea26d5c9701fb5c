//! Parallel replication and deterministic aggregation.
//!
//! Every (grid point, replication) pair runs on its own RNG stream, keyed by the
//! replication index so grid points are paired. Results are reduced in index order,
//! so nothing downstream depends on the worker count.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use socnet::dynamics::{SimOptions, Simulation, StepEvent};
use socnet::graph::OmegaTracker;
use socnet::metrics::{avg_betweenness_by_type, betweenness, bonding_capital, degree_increments, eft_sample, EftSample};
use socnet::oracles::{eft_pmf_closed_form, optimal_bonding_with_shares, predictions, OraclePrediction};
use socnet::society::DerivedType;
use socnet::stats::{mean, standard_error};
use socnet::{AgentId, EvolvingGraph, SocietyConfig, TypeId};

use crate::check::{score, CheckOutcome};
use crate::preset::{ExperimentPreset, Measures};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub parallelism: usize,
    pub seed: Option<u64>,
    pub replications: Option<u32>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { parallelism: 1, seed: None, replications: None }
    }
}

/// Everything measured on one replication.
#[derive(Debug, Clone, Default)]
pub struct ReplicationRecord {
    pub stream_id: u64,
    /// Per type, EFTs of the configured birth cohort.
    pub eft: Vec<EftSample>,
    /// `(t, mean utility, per-type mean utility)` at each checkpoint.
    pub bonding: Vec<(u32, f64, Vec<f64>)>,
    pub omega: Vec<(u32, usize)>,
    pub satisfied_fraction: Vec<(u32, f64)>,
    /// Mean utility divided by the optimum at the realized shares, at the horizon.
    pub utility_ratio: f64,
    pub utility_gap: f64,
    pub focus_popularity: Vec<u32>,
    pub betweenness: Vec<(u32, Vec<Option<f64>>)>,
    /// Whether omega stayed at least 2 from the first step at which two types had ties.
    pub holes_held: Option<bool>,
    /// One non-singleton component holding every satisfied agent.
    pub connected: bool,
    /// Per type, final in-degrees.
    pub in_degrees: Vec<Vec<u32>>,
    pub attachment: Vec<(u32, Vec<(u32, u32)>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub replication: u32,
    pub seed: u64,
    pub stream_id: u64,
    pub message: String,
}

/// Raw records for one grid point, kept for scoring.
#[derive(Debug, Clone)]
pub struct PointRun {
    pub label: String,
    pub config: SocietyConfig,
    pub records: Vec<ReplicationRecord>,
    pub failure: Option<ReplicationFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub metric: String,
    pub t: Option<u32>,
    #[serde(rename = "type")]
    pub type_index: Option<usize>,
    pub mean: f64,
    /// Normal-approximation 95% interval over replications.
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeEft {
    #[serde(rename = "type")]
    pub type_index: usize,
    pub n: usize,
    pub unsatisfied: usize,
    pub mean: Option<f64>,
    /// `(T, mass)` over the observed support.
    pub pmf: Vec<(u64, f64)>,
    /// Closed-form mass at `T = 0, 1, 2, ...` when the type is fully homophilous.
    pub oracle: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityCurve {
    pub agent: u32,
    pub t: Vec<u32>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub label: String,
    pub config: SocietyConfig,
    pub derived: Vec<DerivedType>,
    pub completed: u32,
    pub failure: Option<ReplicationFailure>,
    pub stats: Vec<MetricStat>,
    pub eft: Vec<TypeEft>,
    pub popularity: Option<PopularityCurve>,
    pub predictions: Vec<OraclePrediction>,
}

/// Serializable result of a preset run. Wall-clock time lives in [`RunOutcome`] so
/// that identical inputs give byte-identical summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub preset: String,
    pub criteria: Vec<u32>,
    pub seed: u64,
    pub replication_count: u32,
    pub points: Vec<PointSummary>,
    pub comparisons: Vec<CheckOutcome>,
}

impl RunSummary {
    pub fn failed(&self) -> bool {
        self.comparisons.iter().any(|c| c.verdict == crate::Verdict::Fail)
            || self.points.iter().any(|p| p.failure.is_some())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub elapsed: Duration,
    pub points: Vec<PointRun>,
}

struct Observer<'a> {
    measures: &'a Measures,
    checkpoints: &'a [u32],
    config: &'a SocietyConfig,
    record: ReplicationRecord,
    tracker: Option<(OmegaTracker, Vec<bool>)>,
}

impl Observer<'_> {
    fn on_step(&mut self, t: u32, g: &EvolvingGraph, events: &[StepEvent]) {
        if let Some((tracker, has_ties)) = &mut self.tracker {
            tracker.add_agent();
            for e in events.iter().filter(|e| e.linked) {
                tracker.add_edge(e.actor, e.met);
                has_ties[g.type_of(e.actor).0] = true;
                has_ties[g.type_of(e.met).0] = true;
            }
            if has_ties.iter().filter(|&&b| b).count() >= 2 && tracker.omega() < 2 {
                self.record.holes_held = Some(false);
            } else if has_ties.iter().filter(|&&b| b).count() >= 2 && self.record.holes_held.is_none() {
                self.record.holes_held = Some(true);
            }
        }
        if self.checkpoints.contains(&t) {
            let b = bonding_capital(g, self.config);
            self.record.bonding.push((t, b.total, b.per_type));
            self.record.omega.push((t, g.components_undirected().omega));
            let satisfied = g.agents().iter().filter(|a| a.is_satisfied()).count();
            self.record.satisfied_fraction.push((t, satisfied as f64 / g.len() as f64));
        }
        if self.measures.betweenness_at.contains(&t) {
            let scores = betweenness(g);
            self.record.betweenness.push((t, avg_betweenness_by_type(g, &scores, self.config.type_count())));
        }
    }
}

/// Runs one replication and collects every configured measurement.
pub fn run_replication(
    config: &SocietyConfig,
    measures: &Measures,
    checkpoints: &[u32],
    stream_id: u64,
) -> Result<ReplicationRecord, HarnessError> {
    let sim = Simulation::new(config, stream_id)?;
    let mut obs = Observer {
        measures,
        checkpoints,
        config,
        record: ReplicationRecord { stream_id, ..Default::default() },
        tracker: measures.track_omega.then(|| (OmegaTracker::new(), vec![false; config.type_count()])),
    };
    let mut hook = |t: u32, g: &EvolvingGraph, ev: &[StepEvent]| obs.on_step(t, g, ev);
    let traj = sim.run(SimOptions::default(), &mut hook);
    let g = &traj.graph;
    let mut rec = obs.record;

    if let Some([lo, hi]) = measures.eft_cohort {
        rec.eft = (0..config.type_count()).map(|k| eft_sample(g, TypeId(k), lo..=hi)).collect();
    }
    if let Some(i) = measures.focus_agent {
        let dates: Vec<u32> = g.follower_dates(AgentId(i)).collect();
        rec.focus_popularity = (i..=g.t()).map(|t| dates.partition_point(|&d| d <= t) as u32).collect();
    }
    if let Some(a) = &measures.attachment {
        rec.attachment = a.checkpoints.iter().map(|&t| (t, degree_increments(g, t, a.window))).collect();
    }

    let k = config.type_count();
    let mut counts = vec![0usize; k];
    rec.in_degrees = vec![Vec::new(); k];
    for id in g.agent_ids() {
        let ty = g.type_of(id).0;
        counts[ty] += 1;
        rec.in_degrees[ty].push(g.in_degree(id));
    }
    let shares: Vec<f64> = counts.iter().map(|&c| c as f64 / g.len() as f64).collect();
    let optimum = optimal_bonding_with_shares(config, &shares);
    let achieved = bonding_capital(g, config).total;
    rec.utility_ratio = achieved / optimum;
    rec.utility_gap = achieved - optimum;

    let comps = g.components_undirected();
    rec.connected = comps.omega == 1 && {
        let big = comps.sizes.iter().position(|&s| s > 1);
        g.agent_ids().all(|id| !g.agent(id).is_satisfied() || Some(comps.labels[id.index()]) == big)
    };
    Ok(rec)
}

fn stat(metric: &str, t: Option<u32>, type_index: Option<usize>, xs: &[f64]) -> Option<MetricStat> {
    if xs.is_empty() {
        return None;
    }
    let m = mean(xs);
    let half = 1.96 * standard_error(xs);
    Some(MetricStat {
        metric: metric.into(),
        t,
        type_index,
        mean: m,
        ci_low: m - half,
        ci_high: m + half,
        n: xs.len(),
    })
}

fn summarize_point(run: &PointRun, measures: &Measures) -> PointSummary {
    let recs = &run.records;
    let config = &run.config;
    let mut stats = Vec::new();
    let first = recs.first();

    let series = |f: &dyn Fn(&ReplicationRecord, usize) -> f64, len: usize| -> Vec<Vec<f64>> {
        (0..len).map(|j| recs.iter().map(|r| f(r, j)).collect()).collect()
    };
    if let Some(r0) = first {
        for (j, xs) in series(&|r, j| r.bonding[j].1, r0.bonding.len()).iter().enumerate() {
            stats.extend(stat("bonding", Some(r0.bonding[j].0), None, xs));
            for k in 0..config.type_count() {
                let per: Vec<f64> = recs.iter().map(|r| r.bonding[j].2[k]).collect();
                stats.extend(stat("bonding", Some(r0.bonding[j].0), Some(k), &per));
            }
        }
        for (j, xs) in series(&|r, j| r.omega[j].1 as f64, r0.omega.len()).iter().enumerate() {
            stats.extend(stat("omega", Some(r0.omega[j].0), None, xs));
        }
        for (j, xs) in series(&|r, j| r.satisfied_fraction[j].1, r0.satisfied_fraction.len()).iter().enumerate() {
            stats.extend(stat("satisfied_fraction", Some(r0.satisfied_fraction[j].0), None, xs));
        }
        for (j, (t, _)) in r0.betweenness.iter().enumerate() {
            for k in 0..config.type_count() {
                let xs: Vec<f64> = recs.iter().filter_map(|r| r.betweenness[j].1[k]).collect();
                stats.extend(stat("betweenness", Some(*t), Some(k), &xs));
            }
        }
        let horizon = Some(config.horizon);
        let ratio: Vec<f64> = recs.iter().map(|r| r.utility_ratio).collect();
        stats.extend(stat("utility_ratio", horizon, None, &ratio));
        let conn: Vec<f64> = recs.iter().map(|r| r.connected as u8 as f64).collect();
        stats.extend(stat("connected", horizon, None, &conn));
        if measures.track_omega {
            let held: Vec<f64> = recs.iter().filter_map(|r| r.holes_held).map(|b| b as u8 as f64).collect();
            stats.extend(stat("structural_holes_held", horizon, None, &held));
        }
        for k in 0..config.type_count() {
            let deg: Vec<f64> = recs.iter().map(|r| mean_u32(&r.in_degrees[k])).filter(|x| x.is_finite()).collect();
            stats.extend(stat("mean_in_degree", horizon, Some(k), &deg));
        }
    }

    let eft = if measures.eft_cohort.is_some() {
        (0..config.type_count())
            .map(|k| {
                let mut pooled = EftSample::default();
                for r in recs {
                    pooled.extend(r.eft[k].clone());
                }
                let pmf = pooled.pmf().ok();
                let profile = &config.profiles[k];
                TypeEft {
                    type_index: k,
                    n: pooled.values.len(),
                    unsatisfied: pooled.unsatisfied,
                    mean: pmf.as_ref().map(|p| p.mean()),
                    pmf: pmf.map(|p| p.iter().collect()).unwrap_or_default(),
                    oracle: (profile.homophily_index() == 1.0).then(|| eft_pmf_closed_form(profile, 200).mass),
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let popularity = measures.focus_agent.filter(|_| !recs.is_empty()).map(|agent| {
        let len = recs[0].focus_popularity.len();
        let mut curve = PopularityCurve { agent, t: Vec::new(), mean: Vec::new(), se: Vec::new() };
        for j in 0..len {
            let xs: Vec<f64> = recs.iter().map(|r| r.focus_popularity[j] as f64).collect();
            curve.t.push(agent + j as u32);
            curve.mean.push(mean(&xs));
            curve.se.push(standard_error(&xs));
        }
        curve
    });

    PointSummary {
        label: run.label.clone(),
        config: config.clone(),
        derived: config.derived(),
        completed: recs.len() as u32,
        failure: run.failure.clone(),
        stats,
        eft,
        popularity,
        predictions: predictions(config, measures.focus_agent.unwrap_or(10))
            .into_iter()
            .filter(|p| prediction_is_finite(p))
            .collect(),
    }
}

fn mean_u32(xs: &[u32]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64
}

fn prediction_is_finite(p: &OraclePrediction) -> bool {
    use socnet::oracles::PredictionValue::*;
    match &p.value {
        Scalar(x) | Bound(x) => x.is_finite(),
        Pmf { mass, tail } => tail.is_finite() && mass.iter().all(|x| x.is_finite()),
        Curve(pts) => pts.iter().all(|(a, b)| a.is_finite() && b.is_finite()),
        Predicate(_) => true,
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "replication panicked".into())
}

/// Runs every grid point of a preset and scores its checks.
pub fn run_experiment(preset: &ExperimentPreset, options: RunOptions) -> Result<RunOutcome, HarnessError> {
    let start = Instant::now();
    let mut preset = preset.clone();
    if let Some(seed) = options.seed {
        preset.society.seed = seed;
    }
    if let Some(reps) = options.replications {
        preset.society.replication_count = reps;
    }
    preset.validate()?;
    let reps = preset.society.replication_count;
    let configs: Vec<SocietyConfig> = (0..preset.sweep.len()).map(|i| preset.point_config(i)).collect();
    let jobs: Vec<(usize, u32)> = (0..configs.len()).flat_map(|p| (0..reps).map(move |r| (p, r))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let results: Vec<Result<ReplicationRecord, ReplicationFailure>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, r)| {
                let cfg = &configs[p];
                let fail = |message| ReplicationFailure { replication: r, seed: cfg.seed, stream_id: r as u64, message };
                match catch_unwind(AssertUnwindSafe(|| {
                    run_replication(cfg, &preset.measures, &preset.checkpoints, r as u64)
                })) {
                    Ok(Ok(rec)) => Ok(rec),
                    Ok(Err(e)) => Err(fail(e.to_string())),
                    Err(payload) => Err(fail(panic_message(payload))),
                }
            })
            .collect()
    });

    let mut points: Vec<PointRun> = preset
        .sweep
        .iter()
        .zip(&configs)
        .map(|(g, c)| PointRun { label: g.label.clone(), config: c.clone(), records: Vec::new(), failure: None })
        .collect();
    for (&(p, _), res) in jobs.iter().zip(results) {
        let point = &mut points[p];
        if point.failure.is_some() {
            continue;
        }
        match res {
            Ok(rec) => point.records.push(rec),
            Err(f) => {
                point.records.clear();
                point.failure = Some(f);
            }
        }
    }

    let comparisons = preset.oracles.iter().map(|spec| score(spec, &preset, &points)).collect();
    let summary = RunSummary {
        preset: preset.name.clone(),
        criteria: preset.criteria.clone(),
        seed: preset.society.seed,
        replication_count: reps,
        points: points.iter().map(|p| summarize_point(p, &preset.measures)).collect(),
        comparisons,
    };
    Ok(RunOutcome { summary, elapsed: start.elapsed(), points })
}
