//! Type-specific utility, the myopic link rule, and the quantities that follow
//! from the utility alone: gregariousness and the exogenous homophily index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UtilityError {
    #[error("aggregation curve evaluated at negative argument {0}")]
    NegativeArgument(f64),
}

/// Shape of the social benefit aggregation curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveFamily {
    /// `scale * sqrt(x)`
    SqrtLike,
    /// `scale * ln(1 + x)`
    LogLike,
}

/// Concave, increasing benefit aggregation `v` with `v(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationCurve {
    pub family: CurveFamily,
    pub scale: f64,
}

impl AggregationCurve {
    pub fn sqrt(scale: f64) -> Self {
        Self { family: CurveFamily::SqrtLike, scale }
    }

    pub fn log(scale: f64) -> Self {
        Self { family: CurveFamily::LogLike, scale }
    }

    /// Checked evaluation.
    pub fn eval(&self, x: f64) -> Result<f64, UtilityError> {
        if x < 0.0 || x.is_nan() {
            return Err(UtilityError::NegativeArgument(x));
        }
        Ok(self.value(x))
    }

    /// Evaluation for arguments already known to be non-negative.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match self.family {
            CurveFamily::SqrtLike => self.scale * x.sqrt(),
            CurveFamily::LogLike => self.scale * x.ln_1p(),
        }
    }
}

/// Exogenous parameters of one social group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeProfile {
    /// Benefit weight of a same-type followee.
    pub alpha_same: f64,
    /// Benefit weight of a different-type followee, at most `alpha_same`.
    pub alpha_diff: f64,
    /// Cost paid per followee.
    pub link_cost: f64,
    pub curve: AggregationCurve,
    /// Probability of meeting inside the followees-of-followees set.
    pub opportunism: f64,
    /// Probability that a newborn agent has this type.
    pub pop_share: f64,
}

/// Which kind of candidate an agent is considering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    Same,
    Diff,
}

impl Candidate {
    pub fn of(same: bool) -> Self {
        if same {
            Candidate::Same
        } else {
            Candidate::Diff
        }
    }
}

impl TypeProfile {
    /// Utility of an agent holding `n_same` and `n_diff` followees.
    pub fn utility(&self, n_same: u32, n_diff: u32) -> f64 {
        let benefit = self.alpha_same * n_same as f64 + self.alpha_diff * n_diff as f64;
        self.curve.value(benefit) - self.link_cost * (n_same + n_diff) as f64
    }

    /// Change in utility from adding one more followee of the given kind.
    pub fn marginal_link_utility(&self, n_same: u32, n_diff: u32, candidate: Candidate) -> f64 {
        let base = self.alpha_same * n_same as f64 + self.alpha_diff * n_diff as f64;
        let extra = match candidate {
            Candidate::Same => self.alpha_same,
            Candidate::Diff => self.alpha_diff,
        };
        self.curve.value(base + extra) - self.curve.value(base) - self.link_cost
    }

    /// Link iff the marginal utility is strictly positive.
    pub fn link_decision(&self, n_same: u32, n_diff: u32, candidate: Candidate) -> bool {
        self.marginal_link_utility(n_same, n_diff, candidate) > 0.0
    }

    /// True when no candidate kind would be accepted at these counts.
    pub fn is_saturated(&self, n_same: u32, n_diff: u32) -> bool {
        !self.link_decision(n_same, n_diff, Candidate::Same)
            && !self.link_decision(n_same, n_diff, Candidate::Diff)
    }

    /// Number of same-type links an agent adds on top of `offset` benefit:
    /// the smallest maximiser of `v(x * alpha_same + offset) - x * c`.
    pub fn gregariousness(&self, offset: f64) -> u32 {
        optimal_link_count(&self.curve, self.alpha_same, self.link_cost, offset)
    }

    /// Same scan with `alpha_diff` in place of `alpha_same`.
    pub fn max_cross_links(&self, offset: f64) -> u32 {
        optimal_link_count(&self.curve, self.alpha_diff, self.link_cost, offset)
    }

    /// `L*(0)`.
    pub fn base_gregariousness(&self) -> u32 {
        self.gregariousness(0.0)
    }

    /// Minimum long-run fraction of same-type followees the type requires.
    pub fn homophily_index(&self) -> f64 {
        if self.alpha_diff == self.alpha_same {
            return 0.0;
        }
        if self.alpha_diff == 0.0 {
            return 1.0;
        }
        let cross = self.max_cross_links(0.0);
        let same = self.gregariousness(self.alpha_diff * cross as f64);
        if same + cross == 0 {
            return 1.0;
        }
        same as f64 / (same + cross) as f64
    }
}

/// First `x` whose marginal gain `v((x+1)a + off) - v(xa + off)` is at most `cost`.
///
/// Gains are non-increasing in `x` by concavity, so a galloping search followed by
/// bisection finds the same index as a linear scan.
fn optimal_link_count(curve: &AggregationCurve, weight: f64, cost: f64, offset: f64) -> u32 {
    if weight <= 0.0 {
        return 0;
    }
    let gain = |x: u64| {
        let lo = x as f64 * weight + offset;
        curve.value(lo + weight) - curve.value(lo)
    };
    if gain(0) <= cost {
        return 0;
    }
    // invariant: gain(lo) > cost, gain(hi) <= cost
    let mut lo = 0u64;
    let mut hi = 1u64;
    while gain(hi) > cost {
        lo = hi;
        hi = hi.saturating_mul(2);
        if hi >= u32::MAX as u64 {
            return u32::MAX;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if gain(mid) > cost {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(scale: f64, alpha_diff: f64, cost: f64) -> TypeProfile {
        TypeProfile {
            alpha_same: 1.0,
            alpha_diff,
            link_cost: cost,
            curve: AggregationCurve::sqrt(scale),
            opportunism: 0.0,
            pop_share: 1.0,
        }
    }

    fn brute_argmax(curve: &AggregationCurve, weight: f64, cost: f64, offset: f64, upto: u32) -> u32 {
        let mut best = 0;
        let mut best_val = curve.value(offset);
        for x in 1..=upto {
            let val = curve.value(x as f64 * weight + offset) - x as f64 * cost;
            if val > best_val {
                best = x;
                best_val = val;
            }
        }
        best
    }

    #[test]
    fn curve_values() {
        assert_eq!(AggregationCurve::sqrt(1.0).eval(0.0), Ok(0.0));
        assert_eq!(AggregationCurve::sqrt(2.0).eval(4.0), Ok(4.0));
        assert_eq!(AggregationCurve::log(1.0).eval(0.0), Ok(0.0));
        assert_eq!(
            AggregationCurve::log(1.0).eval(-1.0),
            Err(UtilityError::NegativeArgument(-1.0))
        );
    }

    #[test]
    fn marginal_examples() {
        let p = profile(2.0, 0.5, 0.3);
        assert!((p.marginal_link_utility(0, 0, Candidate::Same) - 1.7).abs() < 1e-12);
        assert!(p.link_decision(0, 0, Candidate::Same));

        let h1 = profile(2.0, 0.0, 0.3);
        assert_eq!(h1.marginal_link_utility(3, 0, Candidate::Diff), -0.3);
        assert!(!h1.link_decision(0, 0, Candidate::Diff));
    }

    #[test]
    fn zero_marginal_does_not_link() {
        let mut p = profile(1.0, 0.0, 0.0);
        p.link_cost = p.curve.value(p.alpha_same) - p.curve.value(0.0);
        assert_eq!(p.marginal_link_utility(0, 0, Candidate::Same), 0.0);
        assert!(!p.link_decision(0, 0, Candidate::Same));
        assert_eq!(p.base_gregariousness(), 0);
    }

    #[test]
    fn saturated_at_optimum() {
        let p = profile(2.0, 0.5, 0.3);
        let l = p.base_gregariousness();
        assert_eq!(l, brute_argmax(&p.curve, 1.0, 0.3, 0.0, 1000));
        assert!(p.marginal_link_utility(l, 0, Candidate::Same) < 0.0);
        assert!(p.marginal_link_utility(l, 0, Candidate::Diff) < 0.0);
    }

    #[test]
    fn scan_examples() {
        assert_eq!(profile(1.0, 0.0, 1.5).base_gregariousness(), 0);
        // 2 sqrt(x) - 0.3 x peaks at x = 11 on the integers
        assert_eq!(profile(2.0, 0.0, 0.3).base_gregariousness(), 11);
        assert_eq!(profile(2.0, 0.0, 0.3).gregariousness(1e4), 0);
        assert_eq!(profile(2.0, 0.0, 0.3).max_cross_links(0.0), 0);
        let sym = profile(2.0, 1.0, 0.3);
        assert_eq!(sym.max_cross_links(2.5), sym.gregariousness(2.5));
        let p = profile(3.0, 0.45, 0.25);
        assert_eq!(p.max_cross_links(0.7), brute_argmax(&p.curve, 0.45, 0.25, 0.7, 5000));
    }

    #[test]
    fn homophily_examples() {
        assert_eq!(profile(2.0, 1.0, 0.3).homophily_index(), 0.0);
        assert_eq!(profile(2.0, 0.0, 0.3).homophily_index(), 1.0);
        let p = profile(1.0, 0.7, 0.25);
        assert_eq!(p.max_cross_links(0.0), 3);
        assert_eq!(p.gregariousness(0.7 * 3.0), 2);
        assert!((p.homophily_index() - 0.4).abs() < 1e-15);
        let third = profile(1.0, 0.7, 0.3);
        assert!((third.homophily_index() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn negligible_cross_benefit_is_fully_homophilous() {
        let p = profile(1.0, 0.01, 0.3);
        assert_eq!(p.max_cross_links(0.0), 0);
        assert_eq!(p.homophily_index(), 1.0);
    }
}
