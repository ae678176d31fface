//! Replicated tree simulation and the goodness-of-fit machinery used to check
//! limit theorems against samples.
//!
//! Replicate `r` draws from the ChaCha8 stream `r` of the experiment seed, so
//! results do not depend on how replicates are scheduled across workers.
//! Aggregates are reduced in replicate order with compensated sums.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formulas::DiscreteDistribution;
use crate::scalar::KahanSum;
use crate::tree::{grow_tree_into, tree_stats_with, HoppeTree, StatsScratch, Statistic, TreeParams, TreeStats};

/// Minimum sample size accepted by the KS statistics.
pub const KS_MIN_SAMPLES: usize = 100;

const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub params: TreeParams,
    pub replicates: usize,
}

impl ExperimentConfig {
    pub fn new(theta: f64, n: usize, replicates: usize, seed: u64) -> Result<Self> {
        Self::from_params(TreeParams::new(theta, n, seed)?, replicates)
    }

    /// Replicates of the `theta = 0` extremal tree.
    pub fn extremal(n: usize, replicates: usize, seed: u64) -> Result<Self> {
        Self::from_params(TreeParams::extremal(n, seed)?, replicates)
    }

    pub fn from_params(params: TreeParams, replicates: usize) -> Result<Self> {
        if replicates < 1 {
            return Err(Error::InvalidArgument("replicates must be at least 1".into()));
        }
        Ok(Self { params, replicates })
    }

    /// Stream used by replicate `r`.
    pub fn stream(&self, r: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed());
        rng.set_stream(r as u64);
        rng
    }
}

/// Count, moments and range of one statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased; zero for a single replicate.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl StatSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = KahanSum::from_iter(values.iter().copied()).value() / count as f64;
        let ss = KahanSum::from_iter(values.iter().map(|&x| (x - mean) * (x - mean))).value();
        let variance = if count > 1 { ss / (count - 1) as f64 } else { 0.0 };
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        Some(Self {
            count,
            mean,
            variance,
            min,
            max,
        })
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }
}

/// Output of [`run_experiment`]: per-replicate statistics plus summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub config: ExperimentConfig,
    pub records: Vec<TreeStats>,
    summaries: Vec<(Statistic, StatSummary)>,
}

impl SampleSummary {
    pub fn summary(&self, stat: Statistic) -> Option<&StatSummary> {
        self.summaries.iter().find(|(s, _)| *s == stat).map(|(_, v)| v)
    }

    /// Values of `stat` in replicate order.
    pub fn values(&self, stat: Statistic) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.get(stat)).collect()
    }

    /// Values of `stat` sorted ascending, ready for ECDF-based tests.
    pub fn sorted(&self, stat: Statistic) -> Vec<f64> {
        let mut v = self.values(stat);
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Runs the experiment on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> SampleSummary {
    let params = config.params;
    let records: Vec<TreeStats> = (0..config.replicates.div_ceil(BATCH))
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut tree = HoppeTree::default();
            let mut scratch = StatsScratch::default();
            let lo = b * BATCH;
            let hi = (lo + BATCH).min(config.replicates);
            (lo..hi)
                .map(|r| {
                    grow_tree_into(&params, &mut config.stream(r), &mut tree);
                    tree_stats_with(&tree, &mut scratch)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let summaries = Statistic::ALL
        .iter()
        .filter_map(|&s| {
            let v: Vec<f64> = records.iter().filter_map(|r| r.get(s)).collect();
            StatSummary::from_values(&v).map(|sum| (s, sum))
        })
        .collect();
    SampleSummary {
        config: *config,
        records,
        summaries,
    }
}

/// Runs the experiment on a dedicated pool with `workers` threads.
pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<SampleSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(pool.install(|| run_experiment(config)))
}

/// Empirical pmf of integer-valued samples.
pub fn empirical_pmf(values: &[u64]) -> Option<DiscreteDistribution<f64>> {
    let lo = *values.iter().min()?;
    let hi = *values.iter().max()?;
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for &v in values {
        counts[(v - lo) as usize] += 1;
    }
    let total = values.len() as f64;
    Some(DiscreteDistribution::from_masses(
        lo as i64,
        counts.into_iter().map(|c| c as f64 / total).collect(),
    ))
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF `1 - (1 - x)^theta` of Beta(1, theta).
pub fn beta1_cdf(theta: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            1.0 - (1.0 - x).powf(theta)
        }
    }
}

fn check_sorted(samples: &[f64]) -> Result<()> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: KS_MIN_SAMPLES,
        });
    }
    if samples.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Unsorted);
    }
    Ok(())
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_m - F|` for sorted samples.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    check_sorted(samples)?;
    let m = samples.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    // Ties are handled by jumping the ECDF over the whole run of equal values.
    while i < samples.len() {
        let x = samples[i];
        let mut j = i;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max(f - i as f64 / m).max(j as f64 / m - f);
        i = j;
    }
    Ok(d)
}

/// Two-sample KS statistic `sup |F_a - F_b|` for sorted samples.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic Kolmogorov critical value `sqrt(-ln(alpha/2)/2) / sqrt(m)`.
pub fn ks_critical_value(alpha: f64, m: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (m as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    /// Empirical frequency of `|x - center| >= t`.
    pub frequency: f64,
    pub bound: f64,
    /// Binomial standard error at the bound.
    pub std_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Checks an upper bound on two-sided tail frequencies: at every `t` the
/// frequency of `|x - center| >= t` must not exceed `bound(t) + 3 se`, where
/// `se` is the binomial standard error at success probability `min(bound, 1)`.
pub fn tail_check<F: Fn(f64) -> f64>(samples: &[f64], center: f64, bound: F, t_grid: &[f64]) -> Result<TailReport> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let m = samples.len() as f64;
    let rows = t_grid
        .iter()
        .map(|&t| {
            let hits = samples.iter().filter(|&&x| (x - center).abs() >= t).count();
            let frequency = hits as f64 / m;
            let b = bound(t);
            let p = b.clamp(0.0, 1.0);
            let std_error = (p * (1.0 - p) / m).sqrt();
            TailRow {
                t,
                frequency,
                bound: b,
                std_error,
                pass: frequency <= b + 3.0 * std_error,
            }
        })
        .collect();
    Ok(TailReport { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    /// `max_x (F_lo(x) - F_hi(x))`; nonpositive under exact dominance.
    pub max_violation: f64,
    pub tolerance: f64,
    pub median_lo: f64,
    pub median_hi: f64,
    pub pass: bool,
}

/// Checks that `hi` (the higher-theta sample) is stochastically smaller than
/// `lo`: `F_hi >= F_lo` pointwise, up to `2 / sqrt(R)` with `R` the smaller
/// sample size.
pub fn dominance_check(lo: &[f64], hi: &[f64]) -> Result<DominanceReport> {
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    lo.sort_by(f64::total_cmp);
    hi.sort_by(f64::total_cmp);
    if lo.is_empty() || hi.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let tolerance = 2.0 / (lo.len().min(hi.len()) as f64).sqrt();
    let (nl, nh) = (lo.len() as f64, hi.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst = f64::NEG_INFINITY;
    while i < lo.len() || j < hi.len() {
        let x = match (lo.get(i), hi.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < lo.len() && lo[i] <= x {
            i += 1;
        }
        while j < hi.len() && hi[j] <= x {
            j += 1;
        }
        worst = worst.max(i as f64 / nl - j as f64 / nh);
    }
    let median = |v: &[f64]| v[(v.len() - 1) / 2];
    Ok(DominanceReport {
        max_violation: worst,
        tolerance,
        median_lo: median(&lo),
        median_hi: median(&hi),
        pass: worst <= tolerance,
    })
}

/// Unbiased sample variance of the height for each `n` in `n_grid`.
/// Grid entry `k` uses seed `seed + k`.
pub fn height_variance_probe(theta: f64, n_grid: &[usize], replicates: usize, seed: u64) -> Result<Vec<f64>> {
    n_grid
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let cfg = ExperimentConfig::new(theta, n, replicates, seed.wrapping_add(k as u64))?;
            let s = run_experiment(&cfg);
            Ok(s.summary(Statistic::Height).map_or(0.0, |h| h.variance))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_node_experiment() {
        let cfg = ExperimentConfig::new(1.0, 2, 100, 5).unwrap();
        let s = run_experiment(&cfg);
        let d = s.summary(Statistic::DepthLast).unwrap();
        assert_eq!((d.count, d.mean, d.variance), (100, 1.0, 0.0));
        assert!(ExperimentConfig::new(1.0, 2, 0, 5).is_err());
    }

    #[test]
    fn single_node_has_no_subtree_summary() {
        let s = run_experiment(&ExperimentConfig::new(1.0, 1, 10, 0).unwrap());
        assert!(s.summary(Statistic::Subtree2).is_none());
        assert_eq!(s.summary(Statistic::Leaves).unwrap().mean, 1.0);
    }

    #[test]
    fn deterministic_across_workers() {
        let cfg = ExperimentConfig::new(2.0, 300, 1000, 42).unwrap();
        let a = run_experiment_with_workers(&cfg, 1).unwrap();
        let b = run_experiment_with_workers(&cfg, 4).unwrap();
        let c = run_experiment_with_workers(&cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn replicates_are_distinct_streams() {
        let s = run_experiment(&ExperimentConfig::new(1.0, 200, 50, 1).unwrap());
        let ipl = s.values(Statistic::Ipl);
        let distinct: std::collections::BTreeSet<u64> = ipl.iter().map(|&x| x as u64).collect();
        assert!(distinct.len() > 40);
    }

    #[test]
    fn summary_of_known_values() {
        let s = StatSummary::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_abs_diff_eq!(s.variance, 5.0 / 3.0, epsilon = 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert!(StatSummary::from_values(&[]).is_none());
    }

    #[test]
    fn ks_at_quantiles() {
        // (i - 0.5)/m quantiles of the uniform.
        let m = 1000;
        let xs: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.5 / m as f64 + 1e-12);
    }

    #[test]
    fn ks_detects_shift() {
        // Normal quantiles shifted by +1: sup |Phi(x - 1) - Phi(x)| = 2 Phi(1/2) - 1 ≈ 0.383.
        let m = 10_000;
        let xs: Vec<f64> = (1..=m)
            .map(|i| normal_quantile((i as f64 - 0.5) / m as f64) + 1.0)
            .collect();
        let d = ks_statistic(&xs, standard_normal_cdf).unwrap();
        assert!(d > 0.3);
        assert_abs_diff_eq!(d, 2.0 * standard_normal_cdf(0.5) - 1.0, epsilon = 1e-3);
    }

    // Bisection inverse of the normal CDF, test-only.
    fn normal_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if standard_normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn ks_rejects_bad_input() {
        let short = vec![0.0; 10];
        assert_eq!(ks_statistic(&short, |x| x), Err(Error::TooFewSamples { got: 10, need: 100 }));
        let mut xs: Vec<f64> = (0..200).map(|i| i as f64).collect();
        xs.swap(3, 4);
        assert_eq!(ks_statistic(&xs, |x| x), Err(Error::Unsorted));
    }

    #[test]
    fn ks_with_ties() {
        // All mass at 0.5 against the uniform: the gap is 0.5 on both sides.
        let xs = vec![0.5; 200];
        assert_abs_diff_eq!(ks_statistic(&xs, |x| x).unwrap(), 0.5, epsilon = 1e-15);
        let mut xs = vec![0.25; 100];
        xs.extend(vec![0.75; 100]);
        assert_abs_diff_eq!(ks_statistic(&xs, |x| x).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn two_sample_ks_basic() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(two_sample_ks(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = (500..1500).map(|i| i as f64).collect();
        assert_abs_diff_eq!(two_sample_ks(&a, &b).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        assert_abs_diff_eq!(standard_normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(standard_normal_cdf(1.96), 0.975_002_104_851_780, epsilon = 1e-12);
        assert_abs_diff_eq!(standard_normal_cdf(-3.0), 0.001_349_898_031_630_094_6, epsilon = 1e-15);
    }

    #[test]
    fn beta_cdf_shape() {
        let f = beta1_cdf(2.0);
        assert_eq!(f(-1.0), 0.0);
        assert_eq!(f(2.0), 1.0);
        assert_abs_diff_eq!(f(0.5), 0.75);
        let u = beta1_cdf(1.0);
        assert_abs_diff_eq!(u(0.3), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn critical_value() {
        assert_abs_diff_eq!(ks_critical_value(0.01, 10_000), 0.016_276, epsilon = 1e-5);
    }

    #[test]
    fn tail_check_degenerate_and_adversarial() {
        let flat = vec![5.0; 1000];
        let r = tail_check(&flat, 5.0, |t| 2.0 * (-t).exp(), &[0.1, 1.0, 10.0]).unwrap();
        assert!(r.pass());
        assert!(r.rows.iter().all(|row| row.frequency == 0.0));

        // Gaussian quantiles with variance 10 n / 12 at n = 1000: the true
        // two-sided tail at t = 30 is 2(1 - Phi(30 / 28.87)) ≈ 0.30, far above
        // the bound 2 exp(-6 * 900 / 1002) ≈ 0.009.
        let n = 1000.0;
        let sd = (10.0 * n / 12.0f64).sqrt();
        let m = 10_000;
        let wide: Vec<f64> = (1..=m).map(|i| sd * normal_quantile((i as f64 - 0.5) / m as f64)).collect();
        let bound = |t: f64| 2.0 * (-6.0 * t * t / (n + 2.0)).exp();
        let r = tail_check(&wide, 0.0, bound, &[5.0, 30.0]).unwrap();
        assert_abs_diff_eq!(r.rows[1].frequency, 2.0 * (1.0 - standard_normal_cdf(30.0 / sd)), epsilon = 1e-3);
        assert!(r.rows[0].pass);
        assert!(!r.rows[1].pass);
        assert!(!r.pass());
    }

    #[test]
    fn dominance_basic() {
        let a: Vec<f64> = (0..1000).map(|i| (i % 20) as f64).collect();
        assert!(dominance_check(&a, &a).unwrap().pass);
        let shifted: Vec<f64> = a.iter().map(|x| x + 3.0).collect();
        // Larger sample as "lo" (stochastically larger) passes...
        let r = dominance_check(&shifted, &a).unwrap();
        assert!(r.pass && r.median_lo > r.median_hi);
        // ...and reversed fails.
        assert!(!dominance_check(&a, &shifted).unwrap().pass);
    }

    #[test]
    fn empirical_pmf_tally() {
        let p = empirical_pmf(&[2, 2, 3, 5]).unwrap();
        assert_eq!(p.offset(), 2);
        assert_eq!(p.masses(), &[0.5, 0.25, 0.0, 0.25]);
        assert!(empirical_pmf(&[]).is_none());
    }

    #[test]
    fn height_probe_small() {
        let v = height_variance_probe(1.0, &[2], 200, 0).unwrap();
        assert_eq!(v, vec![0.0]);
    }
}
