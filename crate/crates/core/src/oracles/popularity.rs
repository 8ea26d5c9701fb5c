//! Popularity growth curves, the opportunism crossover and mean-field degree laws.

use serde::{Deserialize, Serialize};

use super::lambert::lambert_w_minus1;
use super::OracleError;
use crate::society::SocietyConfig;
use crate::utility::TypeProfile;

/// `slope * ln(t / (i - 1))` for an agent born at `i >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCurve {
    pub birth: u32,
    pub slope: f64,
}

impl LogCurve {
    pub fn new(birth: u32, slope: f64) -> Result<Self, OracleError> {
        if birth < 2 {
            return Err(OracleError::BirthTooEarly(birth));
        }
        Ok(Self { birth, slope })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.slope * (t / (self.birth - 1) as f64).ln()
    }
}

/// `((t / i)^b - 1) / b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub birth: u32,
    pub exponent: f64,
}

impl PowerCurve {
    pub fn value(&self, t: f64) -> f64 {
        ((t / self.birth as f64).powf(self.exponent) - 1.0) / self.exponent
    }
}

/// Log growth of popularity in a tolerant society without opportunism.
pub fn popularity_log_curve(birth: u32, mean_gregariousness: f64) -> Result<LogCurve, OracleError> {
    LogCurve::new(birth, mean_gregariousness)
}

/// Lower bound on popularity in a tolerant, fully opportunistic society.
pub fn popularity_sublinear_bound(birth: u32, exponent: f64) -> PowerCurve {
    PowerCurve { birth, exponent }
}

/// `b = sum_k p_k / L*_k(0)` over types with positive share.
pub fn growth_exponent(config: &SocietyConfig) -> Result<f64, OracleError> {
    let mut b = 0.0;
    for p in config.profiles.iter().filter(|p| p.pop_share > 0.0) {
        let l = p.base_gregariousness();
        if l == 0 {
            return Err(OracleError::NoLinks);
        }
        b += p.pop_share / l as f64;
    }
    Ok(b)
}

/// The bound as printed: `i (-L W_{-1}(-(1/L) e^{-1/L}))^{1/b}`, the root of
/// `L ln(t/i) = ((t/i)^b - 1) / b`.
pub fn crossover_time_bound(birth: u32, mean_gregariousness: f64, exponent: f64) -> Result<f64, OracleError> {
    crossover(birth, mean_gregariousness, exponent, 1.0)
}

/// Exact root of `L ln(t/(i-1)) = ((t/i)^b - 1) / b` on `t >= i`.
pub fn crossover_time_exact(birth: u32, mean_gregariousness: f64, exponent: f64) -> Result<f64, OracleError> {
    if birth < 2 {
        return Err(OracleError::BirthTooEarly(birth));
    }
    let shift = ((birth - 1) as f64 / birth as f64).powf(exponent);
    crossover(birth, mean_gregariousness, exponent, shift)
}

fn crossover(birth: u32, l: f64, b: f64, shift: f64) -> Result<f64, OracleError> {
    if l <= 1.0 {
        return Err(OracleError::GregariousnessTooLow(l));
    }
    let w = lambert_w_minus1(-(1.0 / l) * (-1.0 / l).exp() * shift)?;
    Ok(birth as f64 * (-l * w).powf(1.0 / b))
}

/// Growth exponent of a type's popularity in an intolerant, fully opportunistic society.
pub fn intolerant_exponent(gregariousness: u32) -> f64 {
    let l = gregariousness as f64;
    let mut total = 0.0;
    let mut product = 1.0;
    for m in 0..gregariousness {
        if m > 0 {
            let v = m as f64;
            product *= 1.0 - 1.0 / (v * l - (v - 1.0));
        }
        let m = m as f64;
        total += l / ((m + 1.0) * l - m) * product;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntolerantCurves {
    /// Growth without opportunism.
    pub closed: LogCurve,
    /// Lower bound under full opportunism.
    pub open: PowerCurve,
}

pub fn intolerant_growth_curves(profile: &TypeProfile, birth: u32) -> Result<IntolerantCurves, OracleError> {
    let l = profile.base_gregariousness();
    Ok(IntolerantCurves {
        closed: LogCurve::new(birth, l as f64)?,
        open: PowerCurve { birth, exponent: intolerant_exponent(l) },
    })
}

/// Mean-field in-degree CDF `1 - exp(-d / L*(0))`.
pub fn meanfield_popularity_cdf(gregariousness: u32, d: f64) -> f64 {
    if gregariousness == 0 {
        return 1.0;
    }
    1.0 - (-d / gregariousness as f64).exp()
}
