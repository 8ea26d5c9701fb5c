//! Discrete distributions on non-negative integers and stochastic dominance.

use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPmf {
    support: Vec<u64>,
    mass: Vec<f64>,
    /// Number of samples behind the estimate; 0 for analytic distributions.
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    ADominates,
    BDominates,
    Neither,
}

impl EmpiricalPmf {
    pub fn from_samples<I: IntoIterator<Item = u64>>(samples: I) -> Result<Self, MetricsError> {
        let mut values: Vec<u64> = samples.into_iter().collect();
        if values.is_empty() {
            return Err(MetricsError::Empty);
        }
        values.sort_unstable();
        let n = values.len();
        let mut support = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for v in values {
            if support.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1;
            } else {
                support.push(v);
                counts.push(1);
            }
        }
        let mass = counts.into_iter().map(|c| c as f64 / n as f64).collect();
        Ok(Self { support, mass, n })
    }

    /// Builds a distribution from `(value, mass)` pairs, dropping zero masses and
    /// renormalizing.
    pub fn from_masses<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Result<Self, MetricsError> {
        let mut pairs: Vec<(u64, f64)> = pairs.into_iter().filter(|&(_, m)| m > 0.0).collect();
        pairs.sort_by_key(|&(v, _)| v);
        let total: f64 = pairs.iter().map(|&(_, m)| m).sum();
        if pairs.is_empty() || total <= 0.0 {
            return Err(MetricsError::Empty);
        }
        let mut support: Vec<u64> = Vec::with_capacity(pairs.len());
        let mut mass: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, m) in pairs {
            if support.last() == Some(&v) {
                *mass.last_mut().unwrap() += m / total;
            } else {
                support.push(v);
                mass.push(m / total);
            }
        }
        Ok(Self { support, mass, n: 0 })
    }

    pub fn point_mass(value: u64) -> Self {
        Self { support: vec![value], mass: vec![1.0], n: 1 }
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.support.iter().copied().zip(self.mass.iter().copied())
    }

    pub fn mass_at(&self, x: u64) -> f64 {
        self.support.binary_search(&x).map(|k| self.mass[k]).unwrap_or(0.0)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: u64) -> f64 {
        let upto = self.support.partition_point(|&v| v <= x);
        self.mass[..upto].iter().sum::<f64>().min(1.0)
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, m)| v as f64 * m).sum()
    }

    /// Tolerance `2/sqrt(n)` for two sampled distributions, using the smaller sample.
    pub fn default_tolerance(&self, other: &Self) -> f64 {
        let n = self.n.min(other.n);
        if n == 0 {
            0.0
        } else {
            2.0 / (n as f64).sqrt()
        }
    }
}

/// First-order stochastic dominance on the joint support. `a` dominates when its CDF
/// never exceeds `b`'s by more than `tol` and falls below it by more than `tol` somewhere.
pub fn fosd_test(a: &EmpiricalPmf, b: &EmpiricalPmf, tol: f64) -> Dominance {
    let mut points: Vec<u64> = a.support.iter().chain(b.support.iter()).copied().collect();
    points.sort_unstable();
    points.dedup();
    let (mut a_weak, mut a_strict, mut b_weak, mut b_strict) = (true, false, true, false);
    let (mut ca, mut cb) = (0.0, 0.0);
    let (mut ia, mut ib) = (0, 0);
    for x in points {
        while ia < a.support.len() && a.support[ia] <= x {
            ca += a.mass[ia];
            ia += 1;
        }
        while ib < b.support.len() && b.support[ib] <= x {
            cb += b.mass[ib];
            ib += 1;
        }
        let d = ca - cb;
        a_weak &= d <= tol;
        a_strict |= d < -tol;
        b_weak &= -d <= tol;
        b_strict |= -d < -tol;
    }
    if a_weak && a_strict {
        Dominance::ADominates
    } else if b_weak && b_strict {
        Dominance::BDominates
    } else {
        Dominance::Neither
    }
}

/// `0.5 * sum |a(x) - b(x)|`.
pub fn total_variation(a: &EmpiricalPmf, b: &EmpiricalPmf) -> f64 {
    let mut points: Vec<u64> = a.support.iter().chain(b.support.iter()).copied().collect();
    points.sort_unstable();
    points.dedup();
    0.5 * points.iter().map(|&x| (a.mass_at(x) - b.mass_at(x)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_normalize() {
        let p = EmpiricalPmf::from_samples([3, 1, 3, 3]).unwrap();
        assert_eq!(p.support(), &[1, 3]);
        assert_eq!(p.mass(), &[0.25, 0.75]);
        assert_eq!(p.n(), 4);
        assert_eq!(p.cdf(0), 0.0);
        assert_eq!(p.cdf(2), 0.25);
        assert_eq!(p.mean(), 2.5);
        assert_eq!(EmpiricalPmf::from_samples([]), Err(MetricsError::Empty));
    }

    #[test]
    fn dominance_examples() {
        let a = EmpiricalPmf::from_samples([1, 2, 2, 5]).unwrap();
        assert_eq!(fosd_test(&a, &a, 0.0), Dominance::Neither);
        let three = EmpiricalPmf::point_mass(3);
        let five = EmpiricalPmf::point_mass(5);
        assert_eq!(fosd_test(&three, &five, 0.0), Dominance::BDominates);
        assert_eq!(fosd_test(&five, &three, 0.0), Dominance::ADominates);
    }

    #[test]
    fn crossing_cdfs_are_unordered() {
        let a = EmpiricalPmf::from_samples([0, 10]).unwrap();
        let b = EmpiricalPmf::point_mass(5);
        assert_eq!(fosd_test(&a, &b, 0.0), Dominance::Neither);
        assert_eq!(fosd_test(&a, &b, 0.6), Dominance::Neither);
    }

    #[test]
    fn tv_distance() {
        let a = EmpiricalPmf::from_samples([0, 1]).unwrap();
        let b = EmpiricalPmf::from_samples([1, 2]).unwrap();
        assert!((total_variation(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(total_variation(&a, &a), 0.0);
    }
}
