//! Closed forms for Hoppe-tree statistics: exact moments and pmfs, tail
//! bounds, and asymptotic bands.
//!
//! Asymptotic quantities are kept apart from exact ones; [`MomentReport`]
//! carries a [`Precision`] tag so callers never compare an asymptotic value
//! against an exact oracle at a tight tolerance.

use crate::error::{Error, Result};
use crate::scalar::{KahanSum, Scalar};
use crate::specfun::{shifted_harmonic, trigamma};
use crate::tree::Statistic;

/// Largest `n` accepted by the O(n²) depth dynamic program.
pub const DEPTH_PMF_MAX_NODES: usize = 50_000;
/// Largest `n` accepted by [`subtree_pmf_exact`].
pub const SUBTREE_PMF_MAX_NODES: usize = 10_000;

/// Exact pmf on consecutive integers starting at `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<T> {
    offset: i64,
    pmf: Vec<T>,
}

impl<T: Scalar> DiscreteDistribution<T> {
    /// Validates that masses are nonnegative and sum to one within `1e-10`.
    pub fn new(offset: i64, pmf: Vec<T>) -> Result<Self> {
        let tol = T::lit(1e-10).max(T::epsilon() * T::of_usize(64));
        if pmf.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::InvalidArgument("negative or NaN probability mass".into()));
        }
        let total = KahanSum::from_iter(pmf.iter().copied()).value();
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "probability masses sum to {total}, not 1"
            )));
        }
        Ok(Self { offset, pmf })
    }

    /// Point mass at `k`.
    pub fn point(k: i64) -> Self {
        Self {
            offset: k,
            pmf: vec![T::one()],
        }
    }

    /// Builds from unnormalised integer-keyed weights (used by the oracle and
    /// empirical tallies). Masses are taken as given, without renormalising.
    pub fn from_masses(offset: i64, pmf: Vec<T>) -> Self {
        Self { offset, pmf }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn masses(&self) -> &[T] {
        &self.pmf
    }

    /// Largest support point represented.
    pub fn max_value(&self) -> i64 {
        self.offset + self.pmf.len() as i64 - 1
    }

    /// Mass at `k` (zero outside the stored range).
    pub fn prob(&self, k: i64) -> T {
        let idx = k - self.offset;
        if idx < 0 {
            return T::zero();
        }
        self.pmf.get(idx as usize).copied().unwrap_or_else(T::zero)
    }

    /// `(value, mass)` pairs in increasing order of value.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    pub fn total_mass(&self) -> T {
        KahanSum::from_iter(self.pmf.iter().copied()).value()
    }

    pub fn mean(&self) -> T {
        KahanSum::from_iter(self.iter().map(|(k, p)| T::from_i64(k).unwrap() * p)).value()
    }

    /// Central second moment, computed about the mean.
    pub fn variance(&self) -> T {
        let m = self.mean();
        KahanSum::from_iter(self.iter().map(|(k, p)| {
            let d = T::from_i64(k).unwrap() - m;
            d * d * p
        }))
        .value()
    }

    /// P(X <= k).
    pub fn cdf(&self, k: i64) -> T {
        KahanSum::from_iter(self.iter().take_while(|&(v, _)| v <= k).map(|(_, p)| p)).value()
    }

    /// Half the L1 distance to `other`.
    pub fn total_variation(&self, other: &Self) -> T {
        let lo = self.offset.min(other.offset);
        let hi = self.max_value().max(other.max_value());
        let l1 = KahanSum::from_iter((lo..=hi).map(|k| (self.prob(k) - other.prob(k)).abs()));
        l1.value() * T::lit(0.5)
    }
}

/// Whether a reported quantity is exact for finite `n` or an asymptotic
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport<T> {
    pub statistic: Statistic,
    pub precision: Precision,
    pub theta: T,
    pub n: usize,
    pub mean: T,
    pub variance: T,
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if theta > T::zero() && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTheta(theta.as_f64()))
    }
}

fn check_nodes(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::TooFewNodes { n, min })
    } else {
        Ok(())
    }
}

/// Exact mean and variance of the depth of node `n`.
pub fn depth_moments<T: Scalar>(theta: T, n: usize) -> Result<MomentReport<T>> {
    check_theta(theta)?;
    check_nodes(n, 2)?;
    let h1 = shifted_harmonic(theta, n - 2, 1)?;
    let h2 = shifted_harmonic(theta, n - 2, 2)?;
    Ok(MomentReport {
        statistic: Statistic::DepthLast,
        precision: Precision::Exact,
        theta,
        n,
        mean: T::one() + h1,
        variance: h1 - h2,
    })
}

/// Exact law of the depth of node `n`: one plus independent Bernoulli
/// variables with success probabilities `1/(theta + i)`, `i = 1..n-2`.
pub fn depth_pmf_exact<T: Scalar>(theta: T, n: usize) -> Result<DiscreteDistribution<T>> {
    check_theta(theta)?;
    check_nodes(n, 2)?;
    if n > DEPTH_PMF_MAX_NODES {
        return Err(Error::TooLarge {
            what: "depth pmf",
            n,
            max: DEPTH_PMF_MAX_NODES,
        });
    }
    let mut pmf = Vec::with_capacity(n - 1);
    pmf.push(T::one());
    for i in 1..=n - 2 {
        let p = (theta + T::of_usize(i)).recip();
        let q = T::one() - p;
        pmf.push(T::zero());
        for k in (1..pmf.len()).rev() {
            pmf[k] = pmf[k] * q + pmf[k - 1] * p;
        }
        pmf[0] = pmf[0] * q;
    }
    Ok(DiscreteDistribution { offset: 1, pmf })
}

/// Poisson pmf at `lambda`, truncated where the discarded upper tail is below
/// about 1e-13. Returns the masses and the discarded tail.
pub fn poisson_pmf<T: Scalar>(lambda: T, min_len: usize) -> Result<(DiscreteDistribution<T>, T)> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::NonPositive(lambda.as_f64()));
    }
    let l = lambda.as_f64();
    let cutoff = (l + 12.0 * l.sqrt() + 30.0).ceil() as usize;
    let len = cutoff.max(min_len) + 1;
    let mut pmf = Vec::with_capacity(len);
    let mut log_p = -lambda;
    let ln_lambda = lambda.ln();
    for k in 0..len {
        if k > 0 {
            log_p = log_p + ln_lambda - T::of_usize(k).ln();
        }
        pmf.push(log_p.exp());
    }
    let kept = KahanSum::from_iter(pmf.iter().copied()).value();
    let tail = (T::one() - kept).max(T::zero());
    Ok((DiscreteDistribution { offset: 0, pmf }, tail))
}

/// Total variation distance between the exact depth law of node `n` and the
/// Poisson law with the same mean.
pub fn depth_poisson_tv<T: Scalar>(theta: T, n: usize) -> Result<T> {
    let depth = depth_pmf_exact(theta, n)?;
    let lambda = depth.mean();
    let (poisson, tail) = poisson_pmf(lambda, depth.max_value() as usize)?;
    Ok(depth.total_variation(&poisson) + T::lit(0.5) * tail)
}

/// Exact expected number of leaves, `n >= 2`.
pub fn leaf_mean_exact<T: Scalar>(theta: T, n: usize) -> Result<T> {
    check_theta(theta)?;
    check_nodes(n, 2)?;
    let m = T::of_usize(n - 1);
    let two = T::lit(2.0);
    Ok(m / two + theta * m / (two * (theta + T::of_usize(n - 2))))
}

/// Exact variance of the number of leaves, `n >= 2`.
///
/// Runs the second-moment recursion for the scaled leaf martingale
/// `X_m = (theta + m - 2)(L_m - E[L_m])` from `X_2 = 0`, using that the
/// new-leaf indicator has mean `1 - E[L_{m-1}] / (theta + m - 2)` and
/// `E[X_{m-1}(Y_m - E[Y_m])] = -E[X_{m-1}^2] / ((theta + m - 2)(theta + m - 3))`.
pub fn leaf_var_exact<T: Scalar>(theta: T, n: usize) -> Result<T> {
    check_theta(theta)?;
    check_nodes(n, 2)?;
    let two = T::lit(2.0);
    let mut ex2 = T::zero();
    for m in 3..=n {
        let a = theta + T::of_usize(m - 2);
        let b = theta + T::of_usize(m - 3);
        let ey = T::one() - leaf_mean_exact(theta, m - 1)? / a;
        let var_y = ey * (T::one() - ey);
        let cross = -ex2 / (a * b);
        ex2 = (a / b) * (a / b) * ex2 + two * a * a / b * cross + a * a * var_y;
    }
    let a = theta + T::of_usize(n - 2);
    Ok(ex2 / (a * a))
}

/// Azuma-type bound on P(|L_n - E L_n| >= t): `2 exp(-6 t² / (n + theta + 1))`.
pub fn leaf_tail_bound<T: Scalar>(theta: T, n: usize, t: T) -> Result<T> {
    check_theta(theta)?;
    check_nodes(n, 1)?;
    if !(t > T::zero()) {
        return Err(Error::NonPositive(t.as_f64()));
    }
    let denom = T::of_usize(n) + theta + T::one();
    Ok(T::lit(2.0) * (-T::lit(6.0) * t * t / denom).exp())
}

/// Exact expected internal path length, `n >= 1`.
pub fn ipl_mean_exact<T: Scalar>(theta: T, n: usize) -> Result<T> {
    check_theta(theta)?;
    check_nodes(n, 1)?;
    Ok((theta + T::of_usize(n - 1)) * shifted_harmonic(theta, n - 1, 1)?)
}

/// Leading coefficient of `Var(I_n) ~ c n²`: `2/(theta+1) - trigamma(theta+1)`.
pub fn ipl_var_coefficient<T: Scalar>(theta: T) -> Result<T> {
    check_theta(theta)?;
    Ok(T::lit(2.0) / (theta + T::one()) - trigamma(theta + T::one())?)
}

/// Exact law of the size of the subtree rooted at node 2, on `1..=n-1`.
///
/// `P(N = k) = (n-2)!/(n-k-1)! * theta^(n-k-1 rising) / (theta+1)^(n-2 rising)`,
/// evaluated in log space; empty products are one.
pub fn subtree_pmf_exact<T: Scalar>(theta: T, n: usize) -> Result<DiscreteDistribution<T>> {
    check_theta(theta)?;
    check_nodes(n, 2)?;
    if n > SUBTREE_PMF_MAX_NODES {
        return Err(Error::TooLarge {
            what: "subtree pmf",
            n,
            max: SUBTREE_PMF_MAX_NODES,
        });
    }
    // log_rising[j] = ln(theta (theta+1) ... (theta+j-1)), log_fact[j] = ln j!
    let mut log_rising = Vec::with_capacity(n);
    let mut log_fact = Vec::with_capacity(n);
    let mut rising = KahanSum::new();
    let mut fact = KahanSum::new();
    log_rising.push(T::zero());
    log_fact.push(T::zero());
    for j in 1..n {
        rising.add((theta + T::of_usize(j - 1)).ln());
        fact.add(T::of_usize(j).ln());
        log_rising.push(rising.value());
        log_fact.push(fact.value());
    }
    // ln((theta+1)...(theta+n-2))
    let log_denom = log_rising[n - 1] - theta.ln();
    let pmf = (1..n)
        .map(|k| {
            let rest = n - k - 1;
            (log_fact[n - 2] - log_fact[rest] + log_rising[rest] - log_denom).exp()
        })
        .collect();
    Ok(DiscreteDistribution { offset: 1, pmf })
}

/// Upper bound `3(theta + 1) eps` on P(N_n <= eps n).
pub fn small_subtree_bound<T: Scalar>(theta: T, eps: T) -> Result<T> {
    check_theta(theta)?;
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(T::lit(3.0) * (theta + T::one()) * eps)
}

/// Ancestor probability and descendant expectation for node `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncestorStats<T> {
    /// P(node i is an ancestor of node n).
    pub prob: T,
    /// Expected number of descendants of node i among the first n-1 nodes.
    pub expected_descendants: T,
}

pub fn ancestor_stats<T: Scalar>(theta: T, i: usize, n: usize) -> Result<AncestorStats<T>> {
    check_theta(theta)?;
    if i < 2 || n <= i {
        return Err(Error::InvalidArgument(format!(
            "ancestor stats need 2 <= i < n, got i={i}, n={n}"
        )));
    }
    let base = theta + T::of_usize(i - 1);
    Ok(AncestorStats {
        prob: base.recip(),
        expected_descendants: (theta + T::of_usize(n - 2)) / base - T::one(),
    })
}

/// Centre `e ln n - 1.5 ln ln n` of the expected-height band, `n >= 3`.
pub fn height_band<T: Scalar>(n: T) -> Result<T> {
    if !(n >= T::lit(3.0)) {
        return Err(Error::InvalidArgument(format!("height band needs n >= 3, got {n}")));
    }
    let ln_n = n.ln();
    Ok(T::lit(std::f64::consts::E) * ln_n - T::lit(1.5) * ln_n.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn depth_moments_small() {
        let r = depth_moments(3.7f64, 2).unwrap();
        assert_eq!((r.mean, r.variance), (1.0, 0.0));
        assert_eq!(r.precision, Precision::Exact);
        let r = depth_moments(1.0f64, 3).unwrap();
        assert_abs_diff_eq!(r.mean, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.variance, 0.25, epsilon = 1e-15);
        let r = depth_moments(2.0f64, 4).unwrap();
        assert_abs_diff_eq!(r.mean, 19.0 / 12.0, epsilon = 1e-15);
        assert!(depth_moments(1.0f64, 1).is_err());
    }

    #[test]
    fn depth_pmf_small() {
        let d = depth_pmf_exact(1.0f64, 2).unwrap();
        assert_eq!(d, DiscreteDistribution::point(1));
        let d = depth_pmf_exact(1.0f64, 3).unwrap();
        assert_abs_diff_eq!(d.prob(1), 0.5);
        assert_abs_diff_eq!(d.prob(2), 0.5);
        let d = depth_pmf_exact(1.0f64, 4).unwrap();
        assert_abs_diff_eq!(d.prob(1), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.prob(2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.prob(3), 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(d.prob(0), 0.0);
        assert_eq!(d.prob(4), 0.0);
        assert!(depth_pmf_exact(1.0f64, DEPTH_PMF_MAX_NODES + 1).is_err());
    }

    #[test]
    fn depth_pmf_moments_match_closed_form() {
        for theta in [0.5f64, 1.0, 2.0] {
            for n in 2..=200 {
                let d = depth_pmf_exact(theta, n).unwrap();
                let r = depth_moments(theta, n).unwrap();
                assert!(d.masses().iter().all(|&p| p >= 0.0));
                assert_abs_diff_eq!(d.total_mass(), 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(d.mean(), r.mean, epsilon = 1e-9);
                assert_abs_diff_eq!(d.variance(), r.variance, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn poisson_tv_two_nodes() {
        // Point mass at 1 vs Poisson(1): TV = 1 - P(X=1) ... = 1 - e^{-1}.
        let tv = depth_poisson_tv(1.0f64, 2).unwrap();
        assert_abs_diff_eq!(tv, 1.0 - (-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn poisson_tv_decays() {
        let tv: Vec<f64> = [100usize, 1000, 10_000]
            .iter()
            .map(|&n| depth_poisson_tv(1.0, n).unwrap())
            .collect();
        assert!(tv[0] > tv[1] && tv[1] > tv[2]);
        let scaled: Vec<f64> = tv
            .iter()
            .zip([100.0f64, 1000.0, 10_000.0])
            .map(|(t, n)| t * n.ln())
            .collect();
        let max = scaled.iter().cloned().fold(f64::MIN, f64::max);
        let min = scaled.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 3.0);
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        for lambda in [0.3f64, 1.0, 9.5, 40.0] {
            let (p, tail) = poisson_pmf(lambda, 0).unwrap();
            assert!(tail < 1e-13);
            assert_abs_diff_eq!(p.total_mass(), 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(p.mean(), lambda, epsilon = 1e-10);
        }
    }

    #[test]
    fn leaf_mean_values() {
        assert_abs_diff_eq!(leaf_mean_exact(0.3f64, 2).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(leaf_mean_exact(2.0f64, 3).unwrap(), 5.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(leaf_mean_exact(1.0f64, 10).unwrap(), 5.0, epsilon = 1e-15);
        assert!(leaf_mean_exact(1.0f64, 1).is_err());
    }

    #[test]
    fn leaf_var_values() {
        assert_eq!(leaf_var_exact(4.0f64, 2).unwrap(), 0.0);
        assert_abs_diff_eq!(leaf_var_exact(1.0f64, 3).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(leaf_var_exact(2.0f64, 3).unwrap(), 2.0 / 9.0, epsilon = 1e-15);
        assert!(leaf_var_exact(1.0f64, 0).is_err());
    }

    #[test]
    fn leaf_var_asymptotics() {
        for theta in [0.5f64, 1.0, 2.0] {
            for n in 10..=1000 {
                let v = leaf_var_exact(theta, n).unwrap();
                let gap = (v - (theta + n as f64 - 1.0) / 12.0).abs() * n as f64;
                assert!(gap <= 2.0, "theta={theta} n={n} gap={gap}");
            }
        }
    }

    #[test]
    fn tail_bound_values() {
        assert_abs_diff_eq!(leaf_tail_bound(1.0f64, 10, 2f64.sqrt()).unwrap(), 2.0 * (-1.0f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(leaf_tail_bound(1.0f64, 10, 1e-9).unwrap(), 2.0, epsilon = 1e-12);
        let b = leaf_tail_bound(1.0f64, 1000, 200.0).unwrap();
        assert!(b > 0.0 && b <= 2.0);
        assert!(leaf_tail_bound(1.0f64, 10, 0.0).is_err());
    }

    #[test]
    fn ipl_mean_values() {
        assert_eq!(ipl_mean_exact(2.5f64, 1).unwrap(), 0.0);
        assert_abs_diff_eq!(ipl_mean_exact(2.5f64, 2).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ipl_mean_exact(1.0f64, 3).unwrap(), 2.5, epsilon = 1e-15);
    }

    #[test]
    fn ipl_variance_coefficient() {
        let c1 = ipl_var_coefficient(1.0f64).unwrap();
        assert_abs_diff_eq!(c1, 2.0 - std::f64::consts::PI.powi(2) / 6.0, epsilon = 1e-12);
        let c2 = ipl_var_coefficient(2.0f64).unwrap();
        let pi2 = std::f64::consts::PI.powi(2) / 6.0;
        assert_abs_diff_eq!(c2, 2.0 / 3.0 - (pi2 - 1.25), epsilon = 1e-12);
        assert_abs_diff_eq!(c2, 0.271_732_599_818_440_23, epsilon = 1e-12);
        for theta in [0.1f64, 0.5, 1.0, 3.0, 10.0, 100.0] {
            assert!(ipl_var_coefficient(theta).unwrap() > 0.0);
        }
    }

    #[test]
    fn subtree_pmf_values() {
        assert_eq!(subtree_pmf_exact(3.0f64, 2).unwrap().masses(), &[1.0]);
        let d = subtree_pmf_exact(2.0f64, 3).unwrap();
        assert_abs_diff_eq!(d.prob(1), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.prob(2), 1.0 / 3.0, epsilon = 1e-15);
        assert!(subtree_pmf_exact(1.0f64, SUBTREE_PMF_MAX_NODES + 1).is_err());
    }

    #[test]
    fn subtree_pmf_uniform_at_theta_one() {
        for n in [2usize, 10, 1000, 10_000] {
            let d = subtree_pmf_exact(1.0f64, n).unwrap();
            assert_eq!(d.offset(), 1);
            assert_eq!(d.masses().len(), n - 1);
            for &p in d.masses() {
                assert_abs_diff_eq!(p, 1.0 / (n - 1) as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn subtree_pmf_normalised() {
        for theta in [0.1f64, 0.5, 2.0, 7.0] {
            for n in [2usize, 5, 77, 5000] {
                let d = subtree_pmf_exact(theta, n).unwrap();
                assert_abs_diff_eq!(d.total_mass(), 1.0, epsilon = 1e-10);
                // Beta(1, theta) limit: E[N]/n -> 1/(1+theta).
                if n == 5000 {
                    assert_abs_diff_eq!(d.mean() / n as f64, 1.0 / (1.0 + theta), epsilon = 1e-3);
                }
            }
        }
    }

    #[test]
    fn small_subtree_bound_values() {
        assert_abs_diff_eq!(small_subtree_bound(1.0f64, 0.1).unwrap(), 0.6, epsilon = 1e-15);
        assert!(small_subtree_bound(1.0f64, 1e-12).unwrap() < 1e-10);
        assert!(small_subtree_bound(1.0f64, 0.0).is_err());
        assert!(small_subtree_bound(1.0f64, 1.0).is_err());
    }

    #[test]
    fn small_subtree_bound_holds_exactly() {
        for theta in [0.5f64, 1.0, 2.0] {
            let d = subtree_pmf_exact(theta, 1000).unwrap();
            for eps in [0.01f64, 0.05, 0.1, 0.3] {
                let p = d.cdf((eps * 1000.0).floor() as i64);
                assert!(p <= small_subtree_bound(theta, eps).unwrap());
            }
        }
    }

    #[test]
    fn ancestor_values() {
        let a = ancestor_stats(1.0f64, 2, 17).unwrap();
        assert_eq!(a.prob, 0.5);
        let a = ancestor_stats(0.7f64, 2, 3).unwrap();
        assert_abs_diff_eq!(a.expected_descendants, 0.0, epsilon = 1e-15);
        let a = ancestor_stats(2.0f64, 3, 5).unwrap();
        assert_abs_diff_eq!(a.prob, 0.25);
        assert_abs_diff_eq!(a.expected_descendants, 0.25);
        assert!(ancestor_stats(1.0f64, 1, 5).is_err());
        assert!(ancestor_stats(1.0f64, 5, 5).is_err());
    }

    #[test]
    fn height_band_values() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(height_band(e.powf(e)).unwrap(), e * e - 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(height_band(1e4f64).unwrap(), 21.70, epsilon = 0.01);
        assert!(height_band(2.0f64).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(0, vec![0.5f64, 0.5]).is_ok());
        assert!(DiscreteDistribution::new(0, vec![0.5f64, 0.6]).is_err());
        assert!(DiscreteDistribution::new(0, vec![1.5f64, -0.5]).is_err());
        let a = DiscreteDistribution::new(0, vec![0.5f64, 0.5]).unwrap();
        let b = DiscreteDistribution::new(1, vec![0.5f64, 0.5]).unwrap();
        assert_abs_diff_eq!(a.total_variation(&b), 0.5);
        assert_abs_diff_eq!(a.cdf(0), 0.5);
        assert_abs_diff_eq!(b.cdf(5), 1.0);
    }

    #[test]
    fn single_precision_formulas() {
        let r = depth_moments(2.0f32, 4).unwrap();
        assert_abs_diff_eq!(r.mean, 19.0 / 12.0, epsilon = 1e-6);
        let d = subtree_pmf_exact(1.0f32, 50).unwrap();
        assert_abs_diff_eq!(d.prob(7), 1.0 / 49.0, epsilon = 1e-5);
    }
}
