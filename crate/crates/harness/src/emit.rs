//! Output files: long-form CSV tables, the JSON summary and SVG plots.
//!
//! CSV headers are a fixed contract:
//!
//! | file | columns |
//! |---|---|
//! | `metrics.csv` | `point,metric,t,type,mean,ci_low,ci_high,n` |
//! | `bonding.csv` | `point,t,type,mean_utility,ci_low,ci_high` |
//! | `betweenness.csv` | `point,checkpoint,type,avg_betweenness,ci_low,ci_high` |
//! | `popularity.csv` | `point,t,agent,mean_deg_minus,se` |
//! | `eft_pmf.csv` | `point,type,T,pmf_mass,oracle_mass` |
//! | `oracles.csv` | `criterion,check,points,predicted,observed,tolerance,verdict,detail` |
//!
//! `type` is `all` for society-wide rows. Empty cells mean "not applicable".

use std::fs;
use std::path::{Path, PathBuf};

use socnet::oracles::{popularity_log_curve, popularity_sublinear_bound, growth_exponent};

use crate::preset::OutputKind;
use crate::runner::{MetricStat, RunSummary};
use crate::svg::{Plot, Series};
use crate::HarnessError;

pub const METRICS_HEADER: &[&str] = &["point", "metric", "t", "type", "mean", "ci_low", "ci_high", "n"];
pub const BONDING_HEADER: &[&str] = &["point", "t", "type", "mean_utility", "ci_low", "ci_high"];
pub const BETWEENNESS_HEADER: &[&str] = &["point", "checkpoint", "type", "avg_betweenness", "ci_low", "ci_high"];
pub const POPULARITY_HEADER: &[&str] = &["point", "t", "agent", "mean_deg_minus", "se"];
pub const EFT_PMF_HEADER: &[&str] = &["point", "type", "T", "pmf_mass", "oracle_mass"];
pub const ORACLES_HEADER: &[&str] =
    &["criterion", "check", "points", "predicted", "observed", "tolerance", "verdict", "detail"];

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Write { path: path.to_path_buf(), source }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn type_cell(t: Option<usize>) -> String {
    t.map_or_else(|| "all".to_string(), |k| k.to_string())
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), HarnessError> {
    let err = write_err(path);
    let mut w = csv::Writer::from_path(path).map_err(|e| err(e.into()))?;
    w.write_record(header).map_err(|e| err(e.into()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| err(e.into()))?;
    }
    w.flush().map_err(&err)
}

fn stat_rows<'a>(summary: &'a RunSummary, metric: &str) -> Vec<(String, &'a MetricStat)> {
    summary
        .points
        .iter()
        .flat_map(|p| p.stats.iter().filter(|s| s.metric == metric).map(move |s| (p.label.clone(), s)))
        .collect()
}

pub fn write_csv(summary: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = Vec::new();
    let mut table = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<(), HarnessError> {
        let path = dir.join(name);
        write_table(&path, header, rows)?;
        written.push(path);
        Ok(())
    };

    let metrics = summary
        .points
        .iter()
        .flat_map(|p| {
            p.stats.iter().map(move |s| {
                vec![
                    p.label.clone(),
                    s.metric.clone(),
                    opt(s.t),
                    type_cell(s.type_index),
                    s.mean.to_string(),
                    s.ci_low.to_string(),
                    s.ci_high.to_string(),
                    s.n.to_string(),
                ]
            })
        })
        .collect();
    table("metrics.csv", METRICS_HEADER, metrics)?;

    let short = |metric| {
        stat_rows(summary, metric)
            .into_iter()
            .map(|(label, s)| {
                vec![
                    label,
                    opt(s.t),
                    type_cell(s.type_index),
                    s.mean.to_string(),
                    s.ci_low.to_string(),
                    s.ci_high.to_string(),
                ]
            })
            .collect::<Vec<_>>()
    };
    table("bonding.csv", BONDING_HEADER, short("bonding"))?;
    table("betweenness.csv", BETWEENNESS_HEADER, short("betweenness"))?;

    let mut popularity = Vec::new();
    for p in &summary.points {
        if let Some(c) = &p.popularity {
            for j in 0..c.t.len() {
                popularity.push(vec![
                    p.label.clone(),
                    c.t[j].to_string(),
                    c.agent.to_string(),
                    c.mean[j].to_string(),
                    c.se[j].to_string(),
                ]);
            }
        }
    }
    table("popularity.csv", POPULARITY_HEADER, popularity)?;

    let mut eft = Vec::new();
    for p in &summary.points {
        for e in &p.eft {
            let min_t = e.pmf.first().map_or(1, |&(t, _)| t.min(1));
            let max_t = e.pmf.last().map_or(0, |&(t, _)| t);
            for t in min_t..=max_t {
                let mass = e.pmf.iter().find(|&&(x, _)| x == t).map_or(0.0, |&(_, m)| m);
                let oracle = e.oracle.as_ref().and_then(|o| o.get(t as usize)).copied();
                eft.push(vec![p.label.clone(), e.type_index.to_string(), t.to_string(), mass.to_string(), opt(oracle)]);
            }
        }
    }
    table("eft_pmf.csv", EFT_PMF_HEADER, eft)?;

    let oracles = summary
        .comparisons
        .iter()
        .map(|c| {
            vec![
                c.criterion.to_string(),
                c.check.clone(),
                c.points.join("|"),
                c.predicted.to_string(),
                c.observed.to_string(),
                opt(c.tolerance),
                serde_json::to_value(c.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                c.detail.clone(),
            ]
        })
        .collect();
    table("oracles.csv", ORACLES_HEADER, oracles)?;
    Ok(written)
}

pub fn write_json(summary: &RunSummary, dir: &Path) -> Result<PathBuf, HarnessError> {
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).expect("summary values are finite");
    fs::write(&path, text + "\n").map_err(write_err(&path))?;
    Ok(path)
}

pub fn load_summary(path: &Path) -> Result<RunSummary, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

/// Plots for whatever the summary contains: popularity curves with their oracle
/// curves, EFT CDFs with the closed form, and per-type checkpoint series.
pub fn plots(summary: &RunSummary) -> Vec<(String, Plot)> {
    let mut out = Vec::new();
    let title = |what: &str| format!("{}: {what}", summary.preset);

    let mut pop = Vec::new();
    for p in &summary.points {
        let Some(c) = &p.popularity else { continue };
        pop.push(Series {
            name: format!("{} mean", p.label),
            points: c.t.iter().zip(&c.mean).map(|(&t, &m)| (t as f64, m)).collect(),
            dashed: false,
            step: false,
        });
        let cfg = &p.config;
        let tolerant = cfg.profiles.iter().all(|q| q.homophily_index() == 0.0);
        let gamma = |g: f64| cfg.profiles.iter().all(|q| q.opportunism == g);
        let oracle: Option<Box<dyn Fn(f64) -> f64>> = if tolerant && gamma(0.0) {
            popularity_log_curve(c.agent, cfg.mean_gregariousness()).ok().map(|l| Box::new(move |t| l.value(t)) as _)
        } else if tolerant && gamma(1.0) {
            growth_exponent(cfg).ok().map(|b| {
                let bound = popularity_sublinear_bound(c.agent, b);
                Box::new(move |t| bound.value(t)) as _
            })
        } else {
            None
        };
        if let Some(f) = oracle {
            pop.push(Series {
                name: format!("{} oracle", p.label),
                points: c.t.iter().map(|&t| (t as f64, f(t as f64))).collect(),
                dashed: true,
                step: false,
            });
        }
    }
    if !pop.is_empty() {
        out.push((
            "popularity.svg".to_string(),
            Plot { title: title("in-degree of the focus agent"), x_label: "t".into(), y_label: "deg-".into(), series: pop },
        ));
    }

    let mut cdf = Vec::new();
    for p in &summary.points {
        for e in &p.eft {
            if e.pmf.is_empty() {
                continue;
            }
            let mut acc = 0.0;
            let pts = e.pmf.iter().map(|&(t, m)| {
                acc += m;
                (t as f64, acc)
            });
            cdf.push(Series {
                name: format!("{} type {}", p.label, e.type_index),
                points: std::iter::once((0.0, 0.0)).chain(pts).collect(),
                dashed: false,
                step: true,
            });
            if let Some(o) = &e.oracle {
                let max_t = e.pmf.last().map_or(0, |&(t, _)| t) as usize;
                let mut acc = 0.0;
                let pts = o.iter().take(max_t + 1).enumerate().map(|(t, m)| {
                    acc += m;
                    (t as f64, acc)
                });
                cdf.push(Series {
                    name: format!("{} type {} oracle", p.label, e.type_index),
                    points: pts.collect(),
                    dashed: true,
                    step: true,
                });
            }
        }
    }
    if !cdf.is_empty() {
        out.push((
            "eft_cdf.svg".to_string(),
            Plot { title: title("EFT CDF"), x_label: "T".into(), y_label: "P(EFT <= T)".into(), series: cdf },
        ));
    }

    for (metric, file, y) in [("betweenness", "betweenness.svg", "avg betweenness"), ("bonding", "bonding.svg", "mean utility")] {
        let mut series = Vec::new();
        for p in &summary.points {
            let types: Vec<Option<usize>> = {
                let mut v: Vec<Option<usize>> = p.stats.iter().filter(|s| s.metric == metric).map(|s| s.type_index).collect();
                v.sort();
                v.dedup();
                v
            };
            for ty in types {
                let pts: Vec<(f64, f64)> = p
                    .stats
                    .iter()
                    .filter(|s| s.metric == metric && s.type_index == ty)
                    .filter_map(|s| s.t.map(|t| (t as f64, s.mean)))
                    .collect();
                series.push(Series { name: format!("{} type {}", p.label, type_cell(ty)), points: pts, dashed: false, step: false });
            }
        }
        if !series.is_empty() {
            out.push((file.to_string(), Plot { title: title(y), x_label: "t".into(), y_label: y.into(), series }));
        }
    }
    out
}

pub fn write_svg(summary: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = Vec::new();
    for (name, plot) in plots(summary) {
        let path = dir.join(name);
        fs::write(&path, plot.render()).map_err(write_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the requested formats into `dir`, creating it if needed.
pub fn emit(summary: &RunSummary, formats: &[OutputKind], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(write_err(dir))?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            OutputKind::Csv => written.extend(write_csv(summary, dir)?),
            OutputKind::Json => written.push(write_json(summary, dir)?),
            OutputKind::Svg => written.extend(write_svg(summary, dir)?),
        }
    }
    Ok(written)
}
