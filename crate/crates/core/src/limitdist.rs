//! Limit law of the normalised internal path length `(I_n - n ln n) / n`.
//!
//! The limit `X(theta)` solves
//!
//! ```text
//! X(theta) = (1 - B) X(theta) + B X'(1) + toll(B),   B ~ Beta(1, theta),
//! toll(b)  = b ln b + (1 - b) ln(1 - b) + b,
//! ```
//!
//! with `X'(1)` an independent copy of the `theta = 1` limit. It is sampled by
//! population Picard iteration: every generation rebuilds each entry from two
//! entries of the previous generation chosen uniformly at random.
//!
//! Stage 1 builds `X(1)`. That map is mean-neutral (`E[toll(U)] = 0`), so its
//! fixed point is only determined up to a shift; the population is recentred
//! every generation to the mean `-digamma(2)` fixed by `E[I_n]`. Stage 2 builds
//! `X(theta)` for `theta != 1` against the frozen stage-1 population and needs
//! no recentring because the mean is contracted by `theta / (1 + theta)`.

use rand::distr::Open01;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{KahanSum, Scalar};
use crate::specfun::{digamma, trigamma};

/// Smallest population accepted by [`picard`].
pub const MIN_POPULATION: usize = 10_000;
/// Mean and variance drift below which iteration stops.
pub const DRIFT_TOLERANCE: f64 = 1e-3;

const CHUNK: usize = 4096;
const STAGE_SALT: [u64; 2] = [0x9e37_79b9_7f4a_7c15, 0xc2b2_ae3d_27d4_eb4f];

/// Inverse-CDF draw `1 - u^(1/theta)` of Beta(1, theta).
pub fn beta_from_uniform(theta: f64, u: f64) -> f64 {
    1.0 - u.powf(theta.recip())
}

/// Draws from Beta(1, theta) with `U` uniform on the open unit interval.
pub fn sample_beta<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    beta_from_uniform(theta, u)
}

/// `b ln b + (1 - b) ln(1 - b) + b` on `[0, 1]` with `0 ln 0 = 0`.
pub fn toll<T: Scalar>(b: T) -> T {
    let xlogx = |x: T| if x <= T::zero() { T::zero() } else { x * x.ln() };
    xlogx(b) + xlogx(T::one() - b) + b
}

/// Mean `-digamma(theta+1)` and variance `2/(theta+1) - trigamma(theta+1)` of the limit.
pub fn limit_moments<T: Scalar>(theta: T) -> Result<(T, T)> {
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(Error::InvalidTheta(theta.as_f64()));
    }
    let t1 = theta + T::one();
    Ok((-digamma(t1)?, T::lit(2.0) / t1 - trigamma(t1)?))
}

/// `E[toll(B)]` for `B ~ Beta(1, theta)` by adaptive Simpson quadrature in the
/// uniform variable `u`, where `B = 1 - u^(1/theta)`.
pub fn expected_toll(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidTheta(theta));
    }
    let g = |u: f64| toll(beta_from_uniform(theta, u));
    Ok(adaptive_simpson(&g, 0.0, 1.0, 1e-12, 50))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub theta: f64,
    pub population: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl PicardConfig {
    pub fn new(theta: f64, population: usize, iterations: usize, seed: u64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidTheta(theta));
        }
        if population < MIN_POPULATION {
            return Err(Error::InvalidArgument(format!(
                "population size {population} is below the minimum {MIN_POPULATION}"
            )));
        }
        Ok(Self {
            theta,
            population,
            iterations,
            seed,
        })
    }
}

/// How the last generation moved relative to the one before.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub generations: usize,
    pub mean_drift: f64,
    pub variance_drift: f64,
    pub converged: bool,
}

/// Empirical approximation of the limit law after some number of generations.
#[derive(Debug, Clone, PartialEq)]
pub struct Population<T> {
    values: Vec<T>,
    theta: f64,
    generation: usize,
    convergence: Convergence,
}

impl<T: Scalar> Population<T> {
    /// The all-zero generation 0.
    pub fn zeros(theta: f64, size: usize) -> Self {
        Self {
            values: vec![T::zero(); size],
            theta,
            generation: 0,
            convergence: Convergence {
                generations: 0,
                mean_drift: f64::INFINITY,
                variance_drift: f64::INFINITY,
                converged: false,
            },
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn convergence(&self) -> Convergence {
        self.convergence
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        KahanSum::from_iter(self.values.iter().map(|v| v.as_f64())).value() / self.len() as f64
    }

    /// Population (biased) variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        KahanSum::from_iter(self.values.iter().map(|v| {
            let d = v.as_f64() - m;
            d * d
        }))
        .value()
            / self.len() as f64
    }

    /// Values as f64, sorted ascending.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().map(|x| x.as_f64()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Errors when the last generation still drifted by at least
    /// [`DRIFT_TOLERANCE`].
    pub fn require_converged(&self) -> Result<()> {
        if self.convergence.converged {
            Ok(())
        } else {
            Err(Error::NotConverged {
                drift: self.convergence.mean_drift.max(self.convergence.variance_drift),
                generations: self.generation,
            })
        }
    }

    fn is_base(&self) -> bool {
        self.theta == 1.0
    }
}

/// One Picard generation. `base` must be the frozen `theta = 1` population
/// when `pop.theta() != 1`, and is ignored otherwise.
pub fn advance<T: Scalar>(pop: &Population<T>, base: Option<&Population<T>>, seed: u64) -> Result<Population<T>> {
    let theta = pop.theta;
    let stage = if pop.is_base() { 0 } else { 1 };
    let other: &[T] = if pop.is_base() {
        &pop.values
    } else {
        match base {
            Some(b) if b.is_base() && !b.is_empty() => &b.values,
            _ => {
                return Err(Error::InvalidArgument(
                    "theta != 1 requires a theta = 1 base population".into(),
                ))
            }
        }
    };
    let generation = pop.generation + 1;
    let prev = &pop.values;
    let size = prev.len();
    let key = seed ^ STAGE_SALT[stage];

    let mut values = vec![T::zero(); size];
    values
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            rng.set_stream(((generation as u64) << 32) | chunk as u64);
            for slot in out.iter_mut() {
                let b = T::lit(sample_beta(theta, &mut rng));
                let keep = prev[rng.random_range(0..size)];
                let graft = other[rng.random_range(0..other.len())];
                *slot = (T::one() - b) * keep + b * graft + toll(b);
            }
        });

    let mut next = Population {
        values,
        theta,
        generation,
        convergence: pop.convergence,
    };
    if pop.is_base() {
        let target = -digamma(2.0f64)?;
        let shift = T::lit(target - next.mean());
        next.values.iter_mut().for_each(|v| *v = *v + shift);
    }
    let mean_drift = (next.mean() - pop.mean()).abs();
    let variance_drift = (next.variance() - pop.variance()).abs();
    next.convergence = Convergence {
        generations: generation,
        mean_drift,
        variance_drift,
        converged: mean_drift < DRIFT_TOLERANCE && variance_drift < DRIFT_TOLERANCE,
    };
    Ok(next)
}

fn iterate<T: Scalar>(
    mut pop: Population<T>,
    base: Option<&Population<T>>,
    iterations: usize,
    seed: u64,
) -> Result<Population<T>> {
    for _ in 0..iterations {
        pop = advance(&pop, base, seed)?;
        if pop.convergence.converged {
            break;
        }
    }
    Ok(pop)
}

/// Stage 1: the `theta = 1` limit.
pub fn picard_base<T: Scalar>(population: usize, iterations: usize, seed: u64) -> Result<Population<T>> {
    let cfg = PicardConfig::new(1.0, population, iterations, seed)?;
    iterate(Population::zeros(1.0, cfg.population), None, cfg.iterations, cfg.seed)
}

/// Stage 2 against a supplied `theta = 1` population. For `theta = 1` this is
/// the same as [`picard_base`].
pub fn picard_with_base<T: Scalar>(config: &PicardConfig, base: &Population<T>) -> Result<Population<T>> {
    if config.theta == 1.0 {
        return picard_base(config.population, config.iterations, config.seed);
    }
    if !base.is_base() {
        return Err(Error::InvalidArgument("base population must have theta = 1".into()));
    }
    iterate(
        Population::zeros(config.theta, config.population),
        Some(base),
        config.iterations,
        config.seed,
    )
}

/// Builds the limit population for `config.theta`, running stage 1 first when
/// `theta != 1` with the same size, iteration budget and seed.
pub fn picard<T: Scalar>(config: &PicardConfig) -> Result<Population<T>> {
    let base = picard_base(config.population, config.iterations, config.seed)?;
    if config.theta == 1.0 {
        Ok(base)
    } else {
        picard_with_base(config, &base)
    }
}
