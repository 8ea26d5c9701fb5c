//! Ego-network formation time in fully homophilous societies.

use serde::{Deserialize, Serialize};

use crate::metrics::{Dominance, EmpiricalPmf, MetricsError};
use crate::utility::TypeProfile;

/// Per-step probability of a useful meeting once the first same-type followee exists.
pub fn second_stage_success(profile: &TypeProfile) -> f64 {
    (1.0 - profile.opportunism) * profile.pop_share + profile.opportunism
}

/// Expected EFT: `1/p + L*(alpha_same) / ((1 - gamma) p + gamma)`.
pub fn eeft_closed_form(profile: &TypeProfile) -> f64 {
    if profile.base_gregariousness() == 0 {
        return 0.0;
    }
    let remaining = profile.gregariousness(profile.alpha_same) as f64;
    1.0 / profile.pop_share + remaining / second_stage_success(profile)
}

/// Analytic EFT distribution truncated at `max_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EftPmf {
    /// `mass[t]` is `P(T = t)` for `t` in `0..=max_t`.
    pub mass: Vec<f64>,
    /// `P(T > max_t)`.
    pub tail: f64,
}

impl EftPmf {
    pub fn mean_truncated(&self) -> f64 {
        self.mass.iter().enumerate().map(|(t, m)| t as f64 * m).sum()
    }

    /// Renormalized over `0..=max_t`, for comparison against sampled distributions.
    pub fn to_pmf(&self) -> Result<EmpiricalPmf, MetricsError> {
        EmpiricalPmf::from_masses(self.mass.iter().enumerate().map(|(t, &m)| (t as u64, m)))
    }
}

/// `P(N = n)` for `n` in `0..=max` where `N` counts trials to the first success.
fn geometric(p: f64, max: usize) -> Vec<f64> {
    let mut out = vec![0.0; max + 1];
    let mut survive = 1.0;
    for slot in out.iter_mut().skip(1) {
        *slot = survive * p;
        survive *= 1.0 - p;
    }
    out
}

/// `P(N = n)` for `n` in `0..=max` where `N` counts trials to the `r`-th success.
fn negative_binomial(r: usize, q: f64, max: usize) -> Vec<f64> {
    let mut out = vec![0.0; max + 1];
    if r == 0 {
        out[0] = 1.0;
        return out;
    }
    if r > max {
        return out;
    }
    out[r] = q.powi(r as i32);
    for n in r..max {
        out[n + 1] = out[n] * (1.0 - q) * n as f64 / (n + 1 - r) as f64;
    }
    out
}

/// Distribution of `T = N1 + N2`: trials to the first same-type meeting at rate `p`, then
/// trials to the remaining `L*(0) - 1` links at rate `(1 - gamma) p + gamma`.
pub fn eft_pmf_closed_form(profile: &TypeProfile, max_t: usize) -> EftPmf {
    let l = profile.base_gregariousness() as usize;
    if l == 0 {
        let mut mass = vec![0.0; max_t + 1];
        mass[0] = 1.0;
        return EftPmf { mass, tail: 0.0 };
    }
    let first = geometric(profile.pop_share, max_t);
    let rest = negative_binomial(l - 1, second_stage_success(profile), max_t);
    let mut mass = vec![0.0; max_t + 1];
    for (t, slot) in mass.iter_mut().enumerate() {
        *slot = (1..=t).fold(0.0, |acc, n1| acc + first[n1] * rest[t - n1]);
    }
    let tail = (1.0 - mass.iter().sum::<f64>()).max(0.0);
    EftPmf { mass, tail }
}

/// Parameters that drive the EFT ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EftParams {
    pub share: f64,
    pub opportunism: f64,
    pub gregariousness: u32,
}

impl From<&TypeProfile> for EftParams {
    fn from(p: &TypeProfile) -> Self {
        Self { share: p.pop_share, opportunism: p.opportunism, gregariousness: p.base_gregariousness() }
    }
}

/// Predicted dominance of EFT(a) over EFT(b): EFT grows with gregariousness and shrinks
/// with population share and opportunism. `Neither` when the parameters disagree or tie.
pub fn eft_fosd_prediction(a: EftParams, b: EftParams) -> Dominance {
    use std::cmp::Ordering::*;
    let votes = [
        a.gregariousness.cmp(&b.gregariousness),
        b.share.partial_cmp(&a.share).unwrap_or(Equal),
        b.opportunism.partial_cmp(&a.opportunism).unwrap_or(Equal),
    ];
    let up = votes.iter().any(|&v| v == Greater);
    let down = votes.iter().any(|&v| v == Less);
    match (up, down) {
        (true, false) => Dominance::ADominates,
        (false, true) => Dominance::BDominates,
        _ => Dominance::Neither,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::AggregationCurve;

    fn profile(cost: f64, share: f64, gamma: f64) -> TypeProfile {
        TypeProfile {
            alpha_same: 1.0,
            alpha_diff: 0.0,
            link_cost: cost,
            curve: AggregationCurve::sqrt(1.0),
            opportunism: gamma,
            pop_share: share,
        }
    }

    #[test]
    fn eeft_example() {
        let p = profile(0.22, 0.5, 0.5);
        assert_eq!(p.base_gregariousness(), 5);
        assert_eq!(p.gregariousness(p.alpha_same), 4);
        assert!((eeft_closed_form(&p) - 22.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn eeft_limits() {
        let near_one = profile(0.22, 1.0, 0.0);
        assert!((eeft_closed_form(&near_one) - 5.0).abs() < 1e-12);
        let full = profile(0.22, 0.3, 1.0);
        assert!((eeft_closed_form(&full) - (1.0 / 0.3 + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn single_link_is_geometric() {
        let p = profile(0.5, 0.3, 0.4);
        assert_eq!(p.base_gregariousness(), 1);
        let pmf = eft_pmf_closed_form(&p, 60);
        for t in 1..=60 {
            let g = 0.3 * 0.7f64.powi(t as i32 - 1);
            assert!((pmf.mass[t] - g).abs() < 1e-15);
        }
    }

    #[test]
    fn full_opportunism_hand_convolution() {
        let p = profile(0.4, 0.5, 1.0);
        assert_eq!(p.base_gregariousness(), 2);
        let pmf = eft_pmf_closed_form(&p, 40);
        assert!((pmf.mass[2] - 0.5).abs() < 1e-15);
        assert_eq!(pmf.mass[1], 0.0);
    }

    #[test]
    fn normalization_and_mean() {
        let p = profile(0.22, 0.5, 0.5);
        let pmf = eft_pmf_closed_form(&p, 400);
        assert!((pmf.mass.iter().sum::<f64>() + pmf.tail - 1.0).abs() < 1e-9);
        assert!((pmf.mean_truncated() - eeft_closed_form(&p)).abs() < 1e-6);
    }

    #[test]
    fn unsociable_type_is_point_mass() {
        let pmf = eft_pmf_closed_form(&profile(1.5, 0.5, 0.5), 10);
        assert_eq!(pmf.mass[0], 1.0);
        assert_eq!(pmf.tail, 0.0);
    }

    #[test]
    fn ordering_predictions() {
        let base = EftParams { share: 0.5, opportunism: 0.5, gregariousness: 4 };
        let more_links = EftParams { gregariousness: 8, ..base };
        assert_eq!(eft_fosd_prediction(base, more_links), Dominance::BDominates);
        let minority = EftParams { share: 0.2, ..base };
        let majority = EftParams { share: 0.8, ..base };
        assert_eq!(eft_fosd_prediction(minority, majority), Dominance::ADominates);
        let closed = EftParams { opportunism: 0.0, ..base };
        let open = EftParams { opportunism: 1.0, ..base };
        assert_eq!(eft_fosd_prediction(closed, open), Dominance::ADominates);
        let mixed = EftParams { share: 0.8, gregariousness: 8, ..base };
        assert_eq!(eft_fosd_prediction(base, mixed), Dominance::Neither);
    }
}
