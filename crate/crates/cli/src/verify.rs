//! Verification checks, one function per acceptance criterion.
//!
//! Exact checks compare closed forms against history enumeration and need no
//! randomness. Statistical checks draw from streams derived from a single
//! seed; each experiment adds its own fixed offset so experiments never share
//! a stream. Budgets are pinned here and reported next to each observation.

use std::fmt;

use anyhow::Result;
use hoppetree::formulas::{
    ancestor_stats, depth_moments, depth_pmf_exact, depth_poisson_tv, height_band, ipl_mean_exact,
    leaf_mean_exact, leaf_tail_bound, leaf_var_exact, small_subtree_bound, subtree_pmf_exact,
};
use hoppetree::limitdist::{limit_moments, picard_base, picard_with_base, PicardConfig};
use hoppetree::montecarlo::{
    beta1_cdf, dominance_check, ks_statistic, run_experiment, standard_normal_cdf, tail_check,
    two_sample_ks, ExperimentConfig,
};
use hoppetree::oracle::{exact_ancestor_stats, exact_distribution, exact_moment, martingale_residuals};
use hoppetree::specfun::{digamma, shifted_harmonic, trigamma};
use hoppetree::{Pmf, Statistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Exact,
    Statistical,
    All,
}

impl Tier {
    fn exact(self) -> bool {
        matches!(self, Tier::Exact | Tier::All)
    }

    fn statistical(self) -> bool {
        matches!(self, Tier::Statistical | Tier::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Perturbs the leaf-mean formula by 1e-6 so the exact tier must fail.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    AtMost(f64),
    Below(f64),
    /// Diagnostic only; never fails.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u32,
    pub name: String,
    pub observed: f64,
    pub budget: Budget,
}

impl Check {
    fn at_most(criterion: u32, name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            observed,
            budget: Budget::AtMost(limit),
        }
    }

    fn below(criterion: u32, name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            observed,
            budget: Budget::Below(limit),
        }
    }

    fn info(criterion: u32, name: impl Into<String>, observed: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            observed,
            budget: Budget::Info,
        }
    }

    pub fn pass(&self) -> bool {
        match self.budget {
            Budget::AtMost(l) => self.observed <= l,
            Budget::Below(l) => self.observed < l,
            Budget::Info => true,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (budget, verdict) = match self.budget {
            Budget::AtMost(l) => (format!("<= {l:.3e}"), if self.pass() { "PASS" } else { "FAIL" }),
            Budget::Below(l) => (format!("< {l:.3e}"), if self.pass() { "PASS" } else { "FAIL" }),
            Budget::Info => ("-".to_string(), "INFO"),
        };
        write!(
            f,
            "[{:>2}] {:<58} observed={:<13.6e} budget={:<13} {}",
            self.criterion, self.name, self.observed, budget, verdict
        )
    }
}

/// Runs the selected tier, calling `report` as each check completes.
pub fn run_tier(tier: Tier, opts: VerifyOptions, mut report: impl FnMut(&Check)) -> Result<Vec<Check>> {
    let mut all = Vec::new();
    let mut push = |checks: Vec<Check>| {
        for c in &checks {
            report(c);
        }
        all.extend(checks);
    };
    if tier.exact() {
        push(depth_law_equivalence()?);
        push(moment_identities(opts)?);
        push(martingale_identities()?);
        push(leaf_variance_asymptotics()?);
        push(poisson_decay()?);
        push(special_functions()?);
    }
    if tier.statistical() {
        push(clt(opts.seed)?);
        push(azuma_tail(opts.seed)?);
        push(beta_limit(opts.seed)?);
        push(small_subtrees(opts.seed)?);
        push(height(opts.seed)?);
        push(limit_law(opts.seed)?);
    }
    Ok(all)
}

const EXACT_THETAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Criterion 1: the depth law equals the shifted Poisson-binomial law.
pub fn depth_law_equivalence() -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for theta in [0.5, 1.0, 2.0, 5.0] {
        for n in 2..=9 {
            let oracle: Pmf = exact_distribution(theta, n, Statistic::DepthLast)?;
            let dp: Pmf = depth_pmf_exact(theta, n)?;
            worst = worst.max(oracle.total_variation(&dp));
        }
    }
    Ok(vec![Check::at_most(
        1,
        "depth law: TV(enumeration, Poisson-binomial), n<=9",
        worst,
        1e-12,
    )])
}

fn variance_of(theta: f64, n: usize, stat: Statistic) -> Result<f64> {
    let m1 = exact_moment(theta, n, stat, 1)?;
    let m2 = exact_moment(theta, n, stat, 2)?;
    Ok(m2 - m1 * m1)
}

/// Criterion 2: closed-form moments and laws against enumeration.
pub fn moment_identities(opts: VerifyOptions) -> Result<Vec<Check>> {
    let fault = if opts.inject_fault { 1e-6 } else { 0.0 };
    let mut depth = 0.0f64;
    let mut leaf_mean = 0.0f64;
    let mut leaf_var = 0.0f64;
    let mut ipl = 0.0f64;
    let mut subtree = 0.0f64;
    let mut ancestor = 0.0f64;
    for theta in EXACT_THETAS {
        for n in 2..=9 {
            let d = depth_moments(theta, n)?;
            depth = depth
                .max((d.mean - exact_moment(theta, n, Statistic::DepthLast, 1)?).abs())
                .max((d.variance - variance_of(theta, n, Statistic::DepthLast)?).abs());
            leaf_mean = leaf_mean.max(
                (leaf_mean_exact(theta, n)? + fault - exact_moment(theta, n, Statistic::Leaves, 1)?)
                    .abs(),
            );
            leaf_var = leaf_var
                .max((leaf_var_exact(theta, n)? - variance_of(theta, n, Statistic::Leaves)?).abs());
            ipl = ipl.max((ipl_mean_exact(theta, n)? - exact_moment(theta, n, Statistic::Ipl, 1)?).abs());
            let sub: Pmf = exact_distribution(theta, n, Statistic::Subtree2)?;
            subtree = subtree.max(sub.total_variation(&subtree_pmf_exact(theta, n)?) * 2.0);
            for i in 2..n {
                let closed = ancestor_stats(theta, i, n)?;
                let (p, desc) = exact_ancestor_stats(theta, i, n)?;
                ancestor = ancestor
                    .max((closed.prob - p).abs())
                    .max((closed.expected_descendants - desc).abs());
            }
        }
    }
    Ok(vec![
        Check::at_most(2, "depth mean/variance vs enumeration", depth, 1e-10),
        Check::at_most(2, "leaf mean vs enumeration", leaf_mean, 1e-10),
        Check::at_most(2, "leaf variance recursion vs enumeration", leaf_var, 1e-10),
        Check::at_most(2, "ipl mean vs enumeration", ipl, 1e-10),
        Check::at_most(2, "subtree-2 pmf vs enumeration (L1)", subtree, 1e-10),
        Check::at_most(2, "ancestor prob/descendants vs enumeration", ancestor, 1e-10),
    ])
}

/// Criterion 3: martingale and conditional-depth identities per prefix.
pub fn martingale_identities() -> Result<Vec<Check>> {
    let (mut z, mut x, mut d) = (0.0f64, 0.0f64, 0.0f64);
    for theta in EXACT_THETAS {
        for n in 3..=8 {
            let r = martingale_residuals(theta, n)?;
            z = z.max(r.ipl);
            x = x.max(r.leaves);
            d = d.max(r.depth);
        }
    }
    Ok(vec![
        Check::at_most(3, "ipl martingale residual, n in 3..=8", z, 1e-12),
        Check::at_most(3, "leaf martingale residual, n in 3..=8", x, 1e-12),
        Check::at_most(3, "E[D_n | past] = 1 + I_(n-1)/(theta+n-2) residual", d, 1e-12),
    ])
}

/// Criterion 4: `Var(L_n) = (theta + n - 1)/12 + O(1/n)`.
pub fn leaf_variance_asymptotics() -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for theta in EXACT_THETAS {
        for n in 10..=1000 {
            let gap = (leaf_var_exact(theta, n)? - (theta + n as f64 - 1.0) / 12.0).abs();
            worst = worst.max(gap * n as f64);
        }
    }
    Ok(vec![Check::at_most(
        4,
        "n |Var(L_n) - (theta+n-1)/12|, n in 10..=1000",
        worst,
        2.0,
    )])
}

/// Criterion 6: Poisson approximation of the depth decays like 1/ln n.
pub fn poisson_decay() -> Result<Vec<Check>> {
    let ns = [100usize, 1000, 10_000];
    let tv: Vec<f64> = ns.iter().map(|&n| depth_poisson_tv(1.0, n)).collect::<Result<_, _>>()?;
    let ratio = tv.windows(2).map(|w| w[1] / w[0]).fold(f64::MIN, f64::max);
    let scaled: Vec<f64> = tv.iter().zip(ns).map(|(t, n)| t * (n as f64).ln()).collect();
    let spread = scaled.iter().cloned().fold(f64::MIN, f64::max)
        / scaled.iter().cloned().fold(f64::MAX, f64::min);
    let mut out: Vec<Check> = ns
        .iter()
        .zip(&tv)
        .map(|(n, t)| Check::info(6, format!("TV(D_n, Poisson), theta=1, n={n}"), *t))
        .collect();
    out.push(Check::below(6, "TV strictly decreasing: max TV(10n)/TV(n)", ratio, 1.0));
    out.push(Check::at_most(6, "max/min of TV * ln n", spread, 3.0));
    Ok(out)
}

// Reference values from 30-digit evaluation.
const DIGAMMA_REF: [(f64, f64); 6] = [
    (0.5, -1.963_510_026_021_423_479_4),
    (1.0, -0.577_215_664_901_532_860_61),
    (1.5, 0.036_489_973_978_576_520_559),
    (2.0, 0.422_784_335_098_467_139_39),
    (3.0, 0.922_784_335_098_467_139_39),
    (10.25, 2.277_704_790_686_723_969_3),
];
const TRIGAMMA_REF: [(f64, f64); 6] = [
    (0.5, 4.934_802_200_544_679_309_4),
    (1.0, 1.644_934_066_848_226_436_5),
    (1.5, 0.934_802_200_544_679_309_42),
    (2.0, 0.644_934_066_848_226_436_47),
    (3.0, 0.394_934_066_848_226_436_47),
    (10.25, 0.102_474_521_517_991_866_8),
];

/// Criterion 12: digamma/trigamma accuracy and the harmonic identity.
pub fn special_functions() -> Result<Vec<Check>> {
    let mut dg = 0.0f64;
    for (x, want) in DIGAMMA_REF {
        dg = dg.max((digamma(x)? - want).abs());
    }
    let mut tg = 0.0f64;
    for (x, want) in TRIGAMMA_REF {
        tg = tg.max((trigamma(x)? - want).abs());
    }
    let mut ident = 0.0f64;
    for theta in [0.5f64, 1.0, 2.0, 10.0] {
        for m in [0usize, 1, 10, 1000, 100_000, 1_000_000] {
            let direct = shifted_harmonic(theta, m, 1)?;
            let closed = digamma(theta + m as f64 + 1.0)? - digamma(theta + 1.0)?;
            ident = ident.max((direct - closed).abs());
        }
    }
    Ok(vec![
        Check::at_most(12, "digamma vs reference", dg, 1e-10),
        Check::at_most(12, "trigamma vs reference", tg, 1e-10),
        Check::at_most(12, "harmonic sum = digamma difference", ident, 1e-9),
    ])
}

/// Sup distance between the standardised exact depth law and N(0, 1),
/// evaluated on both sides of every lattice jump. Sample free.
fn exact_depth_normal_distance(theta: f64, n: usize) -> Result<f64> {
    let pmf = depth_pmf_exact(theta, n)?;
    let (mean, sd) = (pmf.mean(), pmf.variance().sqrt());
    let mut below = 0.0;
    let mut worst = 0.0f64;
    for (k, p) in pmf.iter() {
        let phi = standard_normal_cdf((k as f64 - mean) / sd);
        worst = worst.max((phi - below).abs()).max((below + p - phi).abs());
        below += p;
    }
    Ok(worst)
}

/// Criterion 5: CLTs for the depth and the leaf count.
pub fn clt(seed: u64) -> Result<Vec<Check>> {
    let (n, reps) = (10_000usize, 10_000usize);
    let mut out = Vec::new();
    for (k, theta) in [0.5f64, 2.0].into_iter().enumerate() {
        let cfg = ExperimentConfig::new(theta, n, reps, seed.wrapping_add(500 + k as u64))?;
        let s = run_experiment(&cfg);

        let dm = depth_moments(theta, n)?;
        let mut z: Vec<f64> = s
            .values(Statistic::DepthLast)
            .iter()
            .map(|d| (d - dm.mean) / dm.variance.sqrt())
            .collect();
        z.sort_by(f64::total_cmp);
        out.push(Check::at_most(
            5,
            format!("KS(standardised D_n, N(0,1)), theta={theta}"),
            ks_statistic(&z, standard_normal_cdf)?,
            0.02,
        ));
        out.push(Check::info(
            5,
            format!("  exact-law KS(D_n, N(0,1)) without sampling, theta={theta}"),
            exact_depth_normal_distance(theta, n)?,
        ));

        let (lm, lv) = (leaf_mean_exact(theta, n)?, leaf_var_exact(theta, n)?);
        let mut z: Vec<f64> = s
            .values(Statistic::Leaves)
            .iter()
            .map(|l| (l - lm) / lv.sqrt())
            .collect();
        z.sort_by(f64::total_cmp);
        out.push(Check::at_most(
            5,
            format!("KS(standardised L_n, N(0,1)), theta={theta}"),
            ks_statistic(&z, standard_normal_cdf)?,
            0.02,
        ));
    }
    Ok(out)
}

/// Criterion 7: the Azuma tail bound for the leaf count.
pub fn azuma_tail(seed: u64) -> Result<Vec<Check>> {
    let (theta, n, reps) = (1.0f64, 1000usize, 100_000usize);
    let cfg = ExperimentConfig::new(theta, n, reps, seed.wrapping_add(700))?;
    let s = run_experiment(&cfg);
    let leaves = s.values(Statistic::Leaves);
    let center = leaf_mean_exact(theta, n)?;
    let grid = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let report = tail_check(
        &leaves,
        center,
        |t| leaf_tail_bound(theta, n, t).unwrap_or(f64::NAN),
        &grid,
    )?;
    Ok(report
        .rows
        .iter()
        .map(|r| {
            Check::at_most(
                7,
                format!("P(|L_n - E L_n| >= {}) vs Azuma bound + 3se", r.t),
                r.frequency,
                r.bound + 3.0 * r.std_error,
            )
        })
        .collect())
}

/// Criterion 8: `N_n / n` converges to Beta(1, theta).
pub fn beta_limit(seed: u64) -> Result<Vec<Check>> {
    let (n, reps) = (10_000usize, 10_000usize);
    let mut out = Vec::new();
    for (k, theta) in EXACT_THETAS.into_iter().enumerate() {
        let cfg = ExperimentConfig::new(theta, n, reps, seed.wrapping_add(800 + k as u64))?;
        let s = run_experiment(&cfg);
        let frac: Vec<f64> = s
            .sorted(Statistic::Subtree2)
            .iter()
            .map(|v| v / n as f64)
            .collect();
        out.push(Check::at_most(
            8,
            format!("KS(N_n/n, Beta(1,theta)), theta={theta}"),
            ks_statistic(&frac, beta1_cdf(theta))?,
            0.02,
        ));
    }
    let mut uniform = 0.0f64;
    for n in [2usize, 10, 1000, 10_000] {
        let pmf = subtree_pmf_exact(1.0f64, n)?;
        let target = 1.0 / (n - 1) as f64;
        uniform = pmf.masses().iter().fold(uniform, |w, &p| w.max((p - target).abs()));
    }
    out.push(Check::at_most(8, "theta=1 subtree pmf uniform on 1..n-1", uniform, 1e-12));
    Ok(out)
}

/// Criterion 9: `P(N_n <= eps n) <= 3 (theta + 1) eps`.
pub fn small_subtrees(seed: u64) -> Result<Vec<Check>> {
    let (n, reps) = (1000usize, 100_000usize);
    let mut out = Vec::new();
    for (k, theta) in EXACT_THETAS.into_iter().enumerate() {
        let cfg = ExperimentConfig::new(theta, n, reps, seed.wrapping_add(900 + k as u64))?;
        let s = run_experiment(&cfg);
        let sizes = s.values(Statistic::Subtree2);
        for eps in [0.01, 0.05, 0.1] {
            let bound = small_subtree_bound(theta, eps)?;
            let p = bound.min(1.0);
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            let freq = sizes.iter().filter(|&&v| v <= eps * n as f64).count() as f64 / reps as f64;
            out.push(Check::at_most(
                9,
                format!("P(N_n <= {eps} n), theta={theta}"),
                freq,
                bound + 3.0 * se,
            ));
        }
    }
    Ok(out)
}

/// Criterion 10: height band, bounded variance, dominance and the extremal
/// identity `H(0)_n = 1 + H(1)_(n-1)` in law.
pub fn height(seed: u64) -> Result<Vec<Check>> {
    let reps = 10_000usize;
    let mut out = Vec::new();
    for (k, theta) in EXACT_THETAS.into_iter().enumerate() {
        for (j, n) in [100usize, 1000, 10_000].into_iter().enumerate() {
            let offset = 1000 + 10 * k as u64 + j as u64;
            let s = run_experiment(&ExperimentConfig::new(theta, n, reps, seed.wrapping_add(offset))?);
            let h = s.summary(Statistic::Height).expect("height is always defined");
            let center = height_band(n as f64)?;
            out.push(Check::at_most(
                10,
                format!("|mean H_n - band centre|, theta={theta}, n={n}"),
                (h.mean - center).abs(),
                5.0,
            ));
            out.push(Check::at_most(
                10,
                format!("Var(H_n), theta={theta}, n={n}"),
                h.variance,
                10.0,
            ));
        }
    }

    let n = 1000usize;
    let low = run_experiment(&ExperimentConfig::new(0.5, n, reps, seed.wrapping_add(1100))?);
    let high = run_experiment(&ExperimentConfig::new(5.0, n, reps, seed.wrapping_add(1101))?);
    let dom = dominance_check(&low.values(Statistic::Height), &high.values(Statistic::Height))?;
    out.push(Check::at_most(
        10,
        "dominance H(5) <= H(0.5): max(F_0.5 - F_5)",
        dom.max_violation,
        dom.tolerance,
    ));
    out.push(Check::below(
        10,
        "median H(5) < median H(0.5): median difference",
        dom.median_hi - dom.median_lo,
        0.0,
    ));

    let extremal = run_experiment(&ExperimentConfig::extremal(n, reps, seed.wrapping_add(1102))?);
    let rrt = run_experiment(&ExperimentConfig::new(1.0, n - 1, reps, seed.wrapping_add(1103))?);
    let mut h0 = extremal.sorted(Statistic::Height);
    h0.iter_mut().for_each(|h| *h -= 1.0);
    let h1 = rrt.sorted(Statistic::Height);
    out.push(Check::at_most(
        10,
        "KS(H(0)_n - 1, H(1)_(n-1)), n=1000",
        two_sample_ks(&h0, &h1)?,
        0.02,
    ));
    let mut shifted = h1.clone();
    shifted.iter_mut().for_each(|h| *h += 1.0);
    let dom0 = dominance_check(&extremal.values(Statistic::Height), &shifted)?;
    out.push(Check::info(
        10,
        "  max(F_H(0) - F_(1+H(1)_(n-1))) (identity, expect ~0)",
        dom0.max_violation,
    ));
    Ok(out)
}

/// Criterion 11: Picard population moments and the bridge to simulated
/// normalised path lengths.
pub fn limit_law(seed: u64) -> Result<Vec<Check>> {
    let (m, k) = (100_000usize, 40usize);
    let mut out = Vec::new();
    let base = picard_base::<f64>(m, k, seed.wrapping_add(1200))?;
    for (j, theta) in [1.0f64, 2.0].into_iter().enumerate() {
        let pop = if theta == 1.0 {
            base.clone()
        } else {
            let cfg = PicardConfig::new(theta, m, k, seed.wrapping_add(1200))?;
            picard_with_base(&cfg, &base)?
        };
        let (mean, var) = limit_moments(theta)?;
        out.push(Check::info(
            11,
            format!("  Picard generations used, theta={theta}"),
            pop.generation() as f64,
        ));
        out.push(Check::at_most(
            11,
            format!("|population mean + digamma(theta+1)|, theta={theta}"),
            (pop.mean() - mean).abs(),
            0.01,
        ));
        out.push(Check::at_most(
            11,
            format!("|population var - ipl coefficient|, theta={theta}"),
            (pop.variance() - var).abs(),
            0.02,
        ));

        let n = 100_000usize;
        let cfg = ExperimentConfig::new(theta, n, 10_000, seed.wrapping_add(1300 + j as u64))?;
        let s = run_experiment(&cfg);
        let nf = n as f64;
        let scaled: Vec<f64> = s
            .sorted(Statistic::Ipl)
            .iter()
            .map(|i| (i - nf * nf.ln()) / nf)
            .collect();
        out.push(Check::at_most(
            11,
            format!("KS(Picard population, (I_n - n ln n)/n), theta={theta}"),
            two_sample_ks(&pop.sorted(), &scaled)?,
            0.03,
        ));
    }
    Ok(out)
}
