//! Closed-form predictions used to check Monte Carlo output.

mod eft;
mod lambert;
mod popularity;

pub use eft::{
    eeft_closed_form, eft_fosd_prediction, eft_pmf_closed_form, second_stage_success, EftParams, EftPmf,
};
pub use lambert::lambert_w_minus1;
pub use popularity::{
    crossover_time_bound, crossover_time_exact, growth_exponent, intolerant_exponent,
    intolerant_growth_curves, meanfield_popularity_cdf, popularity_log_curve, popularity_sublinear_bound,
    IntolerantCurves, LogCurve, PowerCurve,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::society::SocietyConfig;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("curve undefined for birth date {0}; needs i >= 2")]
    BirthTooEarly(u32),
    #[error("lower Lambert branch undefined at {0}")]
    LambertDomain(f64),
    #[error("Halley iteration stalled at x = {x} with residual {residual}")]
    NoConvergence { x: f64, residual: f64 },
    #[error("mean gregariousness {0} must exceed 1")]
    GregariousnessTooLow(f64),
    #[error("a type with positive share never links")]
    NoLinks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PredictionValue {
    Scalar(f64),
    Pmf { mass: Vec<f64>, tail: f64 },
    Curve(Vec<(f64, f64)>),
    Bound(f64),
    Predicate(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePrediction {
    pub name: String,
    #[serde(flatten)]
    pub value: PredictionValue,
    /// Which result the value comes from.
    pub provenance: String,
    /// Parameter regime in which the prediction holds.
    pub validity: String,
    pub in_regime: bool,
}

/// `sum_k p_k (v_k(alpha_same L*) - c L*)` using the given shares.
pub fn optimal_bonding_with_shares(config: &SocietyConfig, shares: &[f64]) -> f64 {
    config
        .profiles
        .iter()
        .zip(shares)
        .map(|(p, &s)| {
            let l = p.base_gregariousness();
            s * p.utility(l, 0)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondingBound {
    pub value: f64,
    /// Average utility approaches the bound iff every type is fully homophilous.
    pub attained: bool,
}

pub fn optimal_bonding_bound(config: &SocietyConfig) -> BondingBound {
    let shares: Vec<f64> = config.profiles.iter().map(|p| p.pop_share).collect();
    BondingBound {
        value: optimal_bonding_with_shares(config, &shares),
        attained: config.profiles.iter().all(|p| p.homophily_index() == 1.0),
    }
}

/// The network ends up connected iff some type both tolerates other types and
/// sometimes meets strangers.
pub fn connectedness_predicate(config: &SocietyConfig) -> bool {
    config.profiles.iter().any(|p| p.homophily_index() < 1.0 && p.opportunism < 1.0)
}

fn all(config: &SocietyConfig, f: impl Fn(&crate::utility::TypeProfile) -> bool) -> bool {
    config.profiles.iter().all(f)
}

/// Every closed-form prediction for a society, each marked with its regime.
pub fn predictions(config: &SocietyConfig, focus_birth: u32) -> Vec<OraclePrediction> {
    let mut out = Vec::new();
    let mut push = |name: String, value, provenance: &str, validity: &str, in_regime| {
        out.push(OraclePrediction {
            name,
            value,
            provenance: provenance.into(),
            validity: validity.into(),
            in_regime,
        })
    };
    let tolerant = all(config, |p| p.homophily_index() == 0.0);
    let intolerant = all(config, |p| p.homophily_index() == 1.0);

    for (k, p) in config.profiles.iter().enumerate() {
        let h = p.homophily_index();
        push(
            format!("type{k}.gregariousness"),
            PredictionValue::Scalar(p.base_gregariousness() as f64),
            "integer argmax of net utility",
            "any profile",
            true,
        );
        push(format!("type{k}.homophily"), PredictionValue::Scalar(h), "homophily index", "any profile", true);
        if tolerant {
            push(
                format!("type{k}.eft"),
                PredictionValue::Scalar(p.base_gregariousness() as f64),
                "deterministic formation time in tolerant societies",
                "h = 0",
                true,
            );
        }
        push(
            format!("type{k}.eeft"),
            PredictionValue::Scalar(eeft_closed_form(p)),
            "expected formation time, geometric plus negative binomial stages",
            "h = 1, large t",
            h == 1.0,
        );
        let pmf = eft_pmf_closed_form(p, 200);
        push(
            format!("type{k}.eft_pmf"),
            PredictionValue::Pmf { mass: pmf.mass, tail: pmf.tail },
            "geometric and negative binomial convolution",
            "h = 1, large t",
            h == 1.0,
        );
        if intolerant {
            let l = p.base_gregariousness();
            let cdf = (0..=4 * l.max(1)).map(|d| (d as f64, meanfield_popularity_cdf(l, d as f64))).collect();
            push(
                format!("type{k}.popularity_cdf"),
                PredictionValue::Curve(cdf),
                "mean-field popularity distribution",
                "h = 1, gamma = 0",
                p.opportunism == 0.0,
            );
            push(
                format!("type{k}.intolerant_exponent"),
                PredictionValue::Scalar(intolerant_exponent(l)),
                "per-type popularity growth exponent under full opportunism",
                "h = 1, gamma = 1",
                p.opportunism == 1.0,
            );
        }
    }

    let bound = optimal_bonding_bound(config);
    push(
        "bonding.optimum".into(),
        PredictionValue::Bound(bound.value),
        "upper bound on average utility",
        "any society",
        true,
    );
    push(
        "bonding.attained".into(),
        PredictionValue::Predicate(bound.attained),
        "average utility reaches the optimum iff all types are fully homophilous",
        "large t",
        true,
    );
    push(
        "structure.connected".into(),
        PredictionValue::Predicate(connectedness_predicate(config)),
        "connectivity iff a tolerant, non-opportunistic type exists",
        "large t",
        true,
    );

    let lbar = config.mean_gregariousness();
    let never_open = all(config, |p| p.opportunism == 0.0);
    let fully_open = all(config, |p| p.opportunism == 1.0);
    if let Ok(curve) = popularity_log_curve(focus_birth, lbar) {
        let pts = sample_times(focus_birth, config.horizon).map(|t| (t, curve.value(t))).collect();
        push(
            "popularity.log_curve".into(),
            PredictionValue::Curve(pts),
            "logarithmic popularity growth",
            "h = 0, gamma = 0",
            tolerant && never_open,
        );
    }
    if let Ok(b) = growth_exponent(config) {
        let curve = popularity_sublinear_bound(focus_birth, b);
        let pts = sample_times(focus_birth, config.horizon).map(|t| (t, curve.value(t))).collect();
        push(
            "popularity.sublinear_bound".into(),
            PredictionValue::Curve(pts),
            "sublinear lower bound on popularity growth",
            "h = 0, gamma = 1",
            tolerant && fully_open,
        );
        if let Ok(t) = crossover_time_bound(focus_birth, lbar, b) {
            push(
                "popularity.crossover_bound".into(),
                PredictionValue::Bound(t),
                "opportunism overtakes closure, lower Lambert branch",
                "h = 0, comparing gamma = 0 with gamma = 1",
                tolerant,
            );
        }
        if let Ok(t) = crossover_time_exact(focus_birth, lbar, b) {
            push(
                "popularity.crossover_exact".into(),
                PredictionValue::Scalar(t),
                "intersection of the log curve and the sublinear bound",
                "h = 0, comparing gamma = 0 with gamma = 1",
                tolerant,
            );
        }
    }
    out
}

fn sample_times(from: u32, to: u32) -> impl Iterator<Item = f64> {
    let step = ((to.saturating_sub(from)) / 50).max(1);
    (from..=to).step_by(step as usize).map(|t| t as f64)
}
