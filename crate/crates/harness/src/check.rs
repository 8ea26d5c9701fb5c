//! Checks scored after a run: closed-form predictions against Monte Carlo
//! observations, and ordinal comparisons with bootstrap intervals.
//!
//! A check whose point lies outside the oracle's validity regime is reported as
//! [`Verdict::OutOfRegime`] and never scored.

use serde::{Deserialize, Serialize};
use socnet::metrics::{attachment_from_increments, fosd_test, total_variation, Dominance, EftSample, EmpiricalPmf};
use socnet::oracles::{
    connectedness_predicate, crossover_time_bound, crossover_time_exact, eeft_closed_form, eft_fosd_prediction,
    eft_pmf_closed_form, growth_exponent, meanfield_popularity_cdf, popularity_sublinear_bound, EftParams,
};
use socnet::stats::{bootstrap_mean_ci, mean, ols, standard_error};
use socnet::SocietyConfig;

use crate::preset::ExperimentPreset;
use crate::runner::{PointRun, ReplicationRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    /// Every satisfied agent has EFT equal to its type's `L*(0)`.
    DeterministicEft { point: usize },
    /// Mean cohort EFT within `rel_tol` of the closed form.
    Eeft { point: usize, type_index: usize, rel_tol: f64 },
    /// Total variation between the empirical and closed-form EFT pmfs.
    EftPmf { point: usize, type_index: usize, max_tv: f64 },
    /// Dominance of EFT at point `a` over point `b` matches the predicted ordering.
    EftOrdering { a: usize, b: usize, type_index: usize },
    /// Average utility attains the optimum when every type is fully homophilous and
    /// falls significantly short of it otherwise. Requires `h > 0` for every type.
    BondingOptimum { point: usize, rel_tol: f64 },
    /// Omega stays at least 2 once two types have ties, in every replication.
    StructuralHoles { point: usize },
    /// Connected in at least `min_fraction` of replications when the predicate holds,
    /// in none when it fails.
    Connectedness { point: usize, min_fraction: f64 },
    /// Slope of mean popularity against `ln(t/(i-1))` within `rel_tol` of mean gregariousness.
    LogPopularity { point: usize, rel_tol: f64 },
    /// Mean popularity plus `z` standard errors stays above the power-law lower bound for `t > 2i`.
    SublinearBound { point: usize, z: f64 },
    /// Empirical crossover of the full- and zero-opportunism curves is no later than the bound.
    Crossover { slow: usize, fast: usize },
    PreferentialAttachment { point: usize, min_fraction: f64 },
    /// In-degree of type `higher` dominates type `lower`, as the mean-field CDF predicts.
    PopularityOrdering { point: usize, higher: usize, lower: usize },
    /// Mean betweenness of type `higher` exceeds type `lower` (paired 95% bootstrap).
    BetweennessOrdering { point: usize, higher: usize, lower: usize },
    /// The lead of `type_index` over the best other type shrinks from point `strong` to
    /// point `weak` (paired 95% bootstrap).
    HubMarginDrop { strong: usize, weak: usize, type_index: usize },
}

impl Check {
    pub fn points(&self) -> Vec<usize> {
        use Check::*;
        match *self {
            DeterministicEft { point }
            | Eeft { point, .. }
            | EftPmf { point, .. }
            | BondingOptimum { point, .. }
            | StructuralHoles { point }
            | Connectedness { point, .. }
            | LogPopularity { point, .. }
            | SublinearBound { point, .. }
            | PreferentialAttachment { point, .. }
            | PopularityOrdering { point, .. }
            | BetweennessOrdering { point, .. } => vec![point],
            EftOrdering { a, b, .. } => vec![a, b],
            Crossover { slow, fast } => vec![slow, fast],
            HubMarginDrop { strong, weak, .. } => vec![strong, weak],
        }
    }

    pub fn name(&self) -> &'static str {
        use Check::*;
        match self {
            DeterministicEft { .. } => "deterministic_eft",
            Eeft { .. } => "eeft",
            EftPmf { .. } => "eft_pmf",
            EftOrdering { .. } => "eft_ordering",
            BondingOptimum { .. } => "bonding_optimum",
            StructuralHoles { .. } => "structural_holes",
            Connectedness { .. } => "connectedness",
            LogPopularity { .. } => "log_popularity",
            SublinearBound { .. } => "sublinear_bound",
            Crossover { .. } => "crossover",
            PreferentialAttachment { .. } => "preferential_attachment",
            PopularityOrdering { .. } => "popularity_ordering",
            BetweennessOrdering { .. } => "betweenness_ordering",
            HubMarginDrop { .. } => "hub_margin_drop",
        }
    }
}

/// A check together with the acceptance criterion it backs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub criterion: u32,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    OutOfRegime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    Number(f64),
    Label(String),
    Missing,
}

impl Reading {
    fn num(x: f64) -> Self {
        if x.is_finite() {
            Reading::Number(x)
        } else {
            Reading::Missing
        }
    }
}

impl std::fmt::Display for Reading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reading::Number(x) => write!(f, "{x}"),
            Reading::Label(s) => f.write_str(s),
            Reading::Missing => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub criterion: u32,
    pub points: Vec<String>,
    pub predicted: Reading,
    pub observed: Reading,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    /// Regime the oracle requires and whether the points satisfy it.
    pub validity: String,
    pub detail: String,
}

fn dominance_label(d: Dominance) -> String {
    match d {
        Dominance::ADominates => "a_dominates",
        Dominance::BDominates => "b_dominates",
        Dominance::Neither => "neither",
    }
    .into()
}

const RESAMPLES: usize = 4000;

struct Scored {
    predicted: Reading,
    observed: Reading,
    tolerance: Option<f64>,
    pass: bool,
    detail: String,
}

fn all(cfg: &SocietyConfig, f: impl Fn(&socnet::TypeProfile) -> bool) -> bool {
    cfg.profiles.iter().all(f)
}

fn pooled_eft(run: &PointRun, ty: usize) -> EftSample {
    let mut s = EftSample::default();
    for r in &run.records {
        if let Some(e) = r.eft.get(ty) {
            s.extend(e.clone());
        }
    }
    s
}

fn last_betweenness(r: &ReplicationRecord, ty: usize) -> f64 {
    r.betweenness.last().and_then(|(_, v)| v[ty]).unwrap_or(0.0)
}

fn hub_margin(r: &ReplicationRecord, ty: usize, types: usize) -> f64 {
    let best_other = (0..types).filter(|&k| k != ty).map(|k| last_betweenness(r, k)).fold(f64::MIN, f64::max);
    last_betweenness(r, ty) - best_other
}

fn mean_curve(run: &PointRun) -> Vec<(f64, f64)> {
    let n = run.records.first().map_or(0, |r| r.focus_popularity.len());
    (0..n)
        .map(|j| {
            let xs: Vec<f64> = run.records.iter().map(|r| r.focus_popularity[j] as f64).collect();
            (mean(&xs), standard_error(&xs))
        })
        .collect()
}

/// Scores one check. Points with a failed replication score as failures.
pub fn score(spec: &CheckSpec, preset: &ExperimentPreset, points: &[PointRun]) -> CheckOutcome {
    let check = &spec.check;
    let involved: Vec<&PointRun> = check.points().into_iter().map(|i| &points[i]).collect();
    let labels = involved.iter().map(|p| p.label.clone()).collect();
    let (validity, in_regime) = regime(check, &involved);
    let outcome = |s: Scored, verdict| CheckOutcome {
        check: check.name().into(),
        criterion: spec.criterion,
        points: labels,
        predicted: s.predicted,
        observed: s.observed,
        tolerance: s.tolerance,
        verdict,
        validity: validity.clone(),
        detail: s.detail,
    };
    let blank = |detail: String| Scored {
        predicted: Reading::Missing,
        observed: Reading::Missing,
        tolerance: None,
        pass: false,
        detail,
    };
    if !in_regime {
        return outcome(blank("outside the oracle's validity regime; not scored".into()), Verdict::OutOfRegime);
    }
    if let Some(f) = involved.iter().find_map(|p| p.failure.as_ref()) {
        let detail = format!("replication {} (seed {}, stream {}) failed: {}", f.replication, f.seed, f.stream_id, f.message);
        return outcome(blank(detail), Verdict::Fail);
    }
    if involved.iter().any(|p| p.records.is_empty()) {
        return outcome(blank("no replications".into()), Verdict::Fail);
    }
    let s = evaluate(check, &involved, preset);
    let verdict = if s.pass { Verdict::Pass } else { Verdict::Fail };
    outcome(s, verdict)
}

fn regime(check: &Check, pts: &[&PointRun]) -> (String, bool) {
    use Check::*;
    let cfg = |i: usize| &pts[i].config;
    let h = |p: &socnet::TypeProfile| p.homophily_index();
    let (text, ok) = match *check {
        DeterministicEft { .. } => ("every type has h = 0", all(cfg(0), |p| h(p) == 0.0)),
        Eeft { type_index, .. } | EftPmf { type_index, .. } => {
            ("focus type has h = 1", h(&cfg(0).profiles[type_index]) == 1.0)
        }
        EftOrdering { type_index, .. } => (
            "focus type has h = 1 at both points",
            h(&cfg(0).profiles[type_index]) == 1.0 && h(&cfg(1).profiles[type_index]) == 1.0,
        ),
        StructuralHoles { .. } => (
            "at least two types, every type has h = 1",
            cfg(0).type_count() >= 2 && all(cfg(0), |p| h(p) == 1.0),
        ),
        LogPopularity { .. } => (
            "every type has h = 0 and gamma = 0",
            all(cfg(0), |p| h(p) == 0.0 && p.opportunism == 0.0),
        ),
        SublinearBound { .. } | PreferentialAttachment { .. } => (
            "every type has h = 0 and gamma = 1",
            all(cfg(0), |p| h(p) == 0.0 && p.opportunism == 1.0),
        ),
        Crossover { .. } => (
            "h = 0 everywhere; gamma = 0 at the slow point and 1 at the fast point",
            all(cfg(0), |p| h(p) == 0.0 && p.opportunism == 0.0) && all(cfg(1), |p| h(p) == 0.0 && p.opportunism == 1.0),
        ),
        PopularityOrdering { .. } => ("every type has h = 1", all(cfg(0), |p| h(p) == 1.0)),
        BondingOptimum { .. } => ("every type has h > 0", all(cfg(0), |p| h(p) > 0.0)),
        Connectedness { .. } | BetweennessOrdering { .. } | HubMarginDrop { .. } => {
            ("any society", true)
        }
    };
    (text.into(), ok)
}

fn evaluate(check: &Check, pts: &[&PointRun], preset: &ExperimentPreset) -> Scored {
    use Check::*;
    let seed = preset.society.seed;
    let run = pts[0];
    let cfg = &run.config;
    match *check {
        DeterministicEft { .. } => {
            let (mut hits, mut total) = (0usize, 0usize);
            for k in 0..cfg.type_count() {
                let l = cfg.profiles[k].base_gregariousness() as u64;
                let s = pooled_eft(run, k);
                hits += s.values.iter().filter(|&&v| v == l).count();
                total += s.values.len();
            }
            let frac = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
            Scored {
                predicted: Reading::Number(1.0),
                observed: Reading::Number(frac),
                tolerance: Some(0.0),
                pass: total > 0 && hits == total,
                detail: format!("{hits} of {total} satisfied agents formed their network in exactly L*(0) rounds"),
            }
        }
        Eeft { type_index, rel_tol, .. } => {
            let predicted = eeft_closed_form(&cfg.profiles[type_index]);
            let s = pooled_eft(run, type_index);
            let observed = s.pmf().map(|p| p.mean()).unwrap_or(f64::NAN);
            let rel = (observed - predicted).abs() / predicted;
            Scored {
                predicted: Reading::num(predicted),
                observed: Reading::num(observed),
                tolerance: Some(rel_tol),
                pass: rel <= rel_tol,
                detail: format!("relative error {rel:.5} over {} agents, {} unsatisfied", s.values.len(), s.unsatisfied),
            }
        }
        EftPmf { type_index, max_tv, .. } => {
            let s = pooled_eft(run, type_index);
            let oracle = eft_pmf_closed_form(&cfg.profiles[type_index], 400).to_pmf();
            let tv = match (s.pmf(), oracle) {
                (Ok(a), Ok(b)) => total_variation(&a, &b),
                _ => f64::NAN,
            };
            Scored {
                predicted: Reading::Number(0.0),
                observed: Reading::num(tv),
                tolerance: Some(max_tv),
                pass: tv < max_tv,
                detail: format!("total variation over {} agents", s.values.len()),
            }
        }
        EftOrdering { type_index, .. } => {
            let (a, b) = (pooled_eft(pts[0], type_index), pooled_eft(pts[1], type_index));
            let predicted = eft_fosd_prediction(
                EftParams::from(&pts[0].config.profiles[type_index]),
                EftParams::from(&pts[1].config.profiles[type_index]),
            );
            match (a.pmf(), b.pmf()) {
                (Ok(pa), Ok(pb)) => {
                    let tol = pa.default_tolerance(&pb);
                    let observed = fosd_test(&pa, &pb, tol);
                    Scored {
                        predicted: Reading::Label(dominance_label(predicted)),
                        observed: Reading::Label(dominance_label(observed)),
                        tolerance: Some(tol),
                        pass: observed == predicted && predicted != Dominance::Neither,
                        detail: format!("mean EFT {:.4} vs {:.4}", pa.mean(), pb.mean()),
                    }
                }
                _ => Scored {
                    predicted: Reading::Label(dominance_label(predicted)),
                    observed: Reading::Missing,
                    tolerance: None,
                    pass: false,
                    detail: "no satisfied agents in a cohort".into(),
                },
            }
        }
        BondingOptimum { rel_tol, .. } => {
            let ratios: Vec<f64> = run.records.iter().map(|r| r.utility_ratio).collect();
            let gaps: Vec<f64> = run.records.iter().map(|r| r.utility_gap).collect();
            let attained = all(cfg, |p| p.homophily_index() == 1.0);
            let m = mean(&ratios);
            if attained {
                Scored {
                    predicted: Reading::Number(1.0),
                    observed: Reading::num(m),
                    tolerance: Some(rel_tol),
                    pass: (m - 1.0).abs() <= rel_tol,
                    detail: "mean utility over the optimum at realized shares".into(),
                }
            } else {
                let (lo, hi) = bootstrap_mean_ci(&gaps, 0.95, RESAMPLES, seed);
                Scored {
                    predicted: Reading::Label("below_optimum".into()),
                    observed: Reading::num(m),
                    tolerance: None,
                    pass: hi < 0.0,
                    detail: format!("utility minus optimum: 95% bootstrap interval [{lo:.5}, {hi:.5}]"),
                }
            }
        }
        StructuralHoles { .. } => {
            let held = run.records.iter().filter(|r| r.holes_held == Some(true)).count();
            let n = run.records.len();
            Scored {
                predicted: Reading::Number(1.0),
                observed: Reading::Number(held as f64 / n as f64),
                tolerance: Some(0.0),
                pass: held == n,
                detail: format!("{held} of {n} replications kept omega >= 2 at every step"),
            }
        }
        Connectedness { min_fraction, .. } => {
            let n = run.records.len();
            let connected = run.records.iter().filter(|r| r.connected).count();
            let frac = connected as f64 / n as f64;
            let predicted = connectedness_predicate(cfg);
            Scored {
                predicted: Reading::Label(if predicted { "connected" } else { "disconnected" }.into()),
                observed: Reading::Number(frac),
                tolerance: Some(if predicted { 1.0 - min_fraction } else { 0.0 }),
                pass: if predicted { frac >= min_fraction } else { connected == 0 },
                detail: format!("{connected} of {n} replications connected"),
            }
        }
        LogPopularity { rel_tol, .. } => {
            let i = run.records[0].focus_popularity.len();
            let birth = cfg.horizon + 1 - i as u32;
            let curve = mean_curve(run);
            let x: Vec<f64> = (0..curve.len()).map(|j| ((birth + j as u32) as f64 / (birth - 1) as f64).ln()).collect();
            let y: Vec<f64> = curve.iter().map(|c| c.0).collect();
            let (_, slope) = ols(&x, &y);
            let predicted = cfg.mean_gregariousness();
            let rel = (slope - predicted).abs() / predicted;
            Scored {
                predicted: Reading::num(predicted),
                observed: Reading::num(slope),
                tolerance: Some(rel_tol),
                pass: rel <= rel_tol,
                detail: format!("relative error {rel:.4}, agent born at {birth}"),
            }
        }
        SublinearBound { z, .. } => {
            let len = run.records[0].focus_popularity.len();
            let birth = cfg.horizon + 1 - len as u32;
            let (b, worst) = match growth_exponent(cfg) {
                Ok(b) => {
                    let bound = popularity_sublinear_bound(birth, b);
                    let worst = mean_curve(run)
                        .iter()
                        .enumerate()
                        .map(|(j, &(m, se))| (birth + j as u32, m + z * se))
                        .filter(|&(t, _)| t > 2 * birth)
                        .map(|(t, upper)| upper - bound.value(t as f64))
                        .fold(f64::INFINITY, f64::min);
                    (b, worst)
                }
                Err(_) => (f64::NAN, f64::NAN),
            };
            Scored {
                predicted: Reading::Number(0.0),
                observed: Reading::num(worst),
                tolerance: Some(z),
                pass: worst >= 0.0,
                detail: format!("smallest margin of mean + {z} SE over the bound, exponent b = {b:.5}"),
            }
        }
        Crossover { .. } => {
            let (slow, fast) = (mean_curve(pts[0]), mean_curve(pts[1]));
            let birth = cfg.horizon + 1 - slow.len() as u32;
            let lbar = cfg.mean_gregariousness();
            let b = growth_exponent(&pts[1].config).unwrap_or(f64::NAN);
            let bound = crossover_time_bound(birth, lbar, b).unwrap_or(f64::NAN);
            let exact = crossover_time_exact(birth, lbar, b).unwrap_or(f64::NAN);
            let mut first = None;
            for j in (0..slow.len()).rev() {
                if fast[j].0 > slow[j].0 {
                    first = Some(birth + j as u32);
                } else {
                    break;
                }
            }
            let observed = first.map(f64::from).unwrap_or(f64::NAN);
            Scored {
                predicted: Reading::num(bound),
                observed: first.map_or(Reading::Missing, |_| Reading::Number(observed)),
                tolerance: None,
                pass: observed <= bound,
                detail: format!("exact root of the crossover equation {exact:.3}"),
            }
        }
        PreferentialAttachment { min_fraction, .. } => {
            let Some(options) = &preset.measures.attachment else {
                return Scored {
                    predicted: Reading::Number(1.0),
                    observed: Reading::Missing,
                    tolerance: None,
                    pass: false,
                    detail: "attachment increments were not measured".into(),
                };
            };
            let pooled = options.checkpoints.iter().enumerate().map(|(c, &t)| {
                (t, run.records.iter().flat_map(|r| r.attachment[c].1.iter().copied()).collect::<Vec<_>>())
            });
            match attachment_from_increments(pooled, options) {
                Ok(report) => {
                    let pairs: usize = report.checkpoints.iter().map(|c| c.verdicts.len()).sum();
                    Scored {
                        predicted: Reading::Number(1.0),
                        observed: Reading::Number(report.ordered_fraction),
                        tolerance: Some(1.0 - min_fraction),
                        pass: report.ordered_fraction >= min_fraction,
                        detail: format!("{pairs} adjacent bin pairs over {} checkpoints", report.checkpoints.len()),
                    }
                }
                Err(e) => Scored {
                    predicted: Reading::Number(1.0),
                    observed: Reading::Missing,
                    tolerance: None,
                    pass: false,
                    detail: e.to_string(),
                },
            }
        }
        PopularityOrdering { higher, lower, .. } => {
            let pool = |k: usize| {
                EmpiricalPmf::from_samples(run.records.iter().flat_map(|r| r.in_degrees[k].iter().map(|&d| d as u64)))
            };
            let (Ok(hi), Ok(lo)) = (pool(higher), pool(lower)) else {
                return Scored {
                    predicted: Reading::Missing,
                    observed: Reading::Missing,
                    tolerance: None,
                    pass: false,
                    detail: "a type has no agents".into(),
                };
            };
            let tol = hi.default_tolerance(&lo);
            let observed = fosd_test(&hi, &lo, tol);
            let (lh, ll) = (cfg.profiles[higher].base_gregariousness(), cfg.profiles[lower].base_gregariousness());
            let max_d = hi.support().last().copied().max(lo.support().last().copied()).unwrap_or(0);
            let diffs: Vec<f64> = (0..=max_d)
                .map(|d| meanfield_popularity_cdf(lh, d as f64) - meanfield_popularity_cdf(ll, d as f64))
                .collect();
            let mf = if diffs.iter().all(|&d| d <= 0.0) && diffs.iter().any(|&d| d < 0.0) {
                Dominance::ADominates
            } else if diffs.iter().all(|&d| d >= 0.0) && diffs.iter().any(|&d| d > 0.0) {
                Dominance::BDominates
            } else {
                Dominance::Neither
            };
            Scored {
                predicted: Reading::Label(dominance_label(mf)),
                observed: Reading::Label(dominance_label(observed)),
                tolerance: Some(tol),
                pass: observed == Dominance::ADominates && mf == Dominance::ADominates,
                detail: format!("mean in-degree {:.4} vs {:.4}", hi.mean(), lo.mean()),
            }
        }
        BetweennessOrdering { higher, lower, .. } => {
            let d: Vec<f64> =
                run.records.iter().map(|r| last_betweenness(r, higher) - last_betweenness(r, lower)).collect();
            paired_positive(&d, seed, format!("type {higher} minus type {lower}"))
        }
        HubMarginDrop { type_index, .. } => {
            let types = cfg.type_count();
            let d: Vec<f64> = pts[0]
                .records
                .iter()
                .zip(&pts[1].records)
                .map(|(s, w)| hub_margin(s, type_index, types) - hub_margin(w, type_index, types))
                .collect();
            paired_positive(&d, seed, format!("lead of type {type_index}, first point minus second"))
        }
    }
}

fn paired_positive(d: &[f64], seed: u64, what: String) -> Scored {
    let (lo, hi) = bootstrap_mean_ci(d, 0.95, RESAMPLES, seed);
    Scored {
        predicted: Reading::Label("positive".into()),
        observed: Reading::num(mean(d)),
        tolerance: None,
        pass: lo > 0.0,
        detail: format!("{what}: 95% bootstrap interval [{lo:.4}, {hi:.4}]"),
    }
}
