//! Command implementations behind the `hoppetree` binary.

pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hoppetree::formulas::{
    depth_moments, depth_pmf_exact, ipl_mean_exact, ipl_var_coefficient, leaf_mean_exact,
    leaf_var_exact, subtree_pmf_exact, height_band, DEPTH_PMF_MAX_NODES, SUBTREE_PMF_MAX_NODES,
};
use hoppetree::limitdist::{limit_moments, picard_base, picard_with_base, PicardConfig, Population, MIN_POPULATION};
use hoppetree::montecarlo::{run_experiment, ExperimentConfig, StatSummary};
use hoppetree::oracle::{self, exact_distribution};
use hoppetree::{Pmf, Statistic};

pub const SCHEMA: &str = "hoppetree/1";

#[derive(Debug, Parser)]
#[command(name = "hoppetree", version, about = "Simulate and analyse Hoppe trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow independent trees and record one statistic per replicate.
    Simulate(SimulateArgs),
    /// Closed-form moments or exact pmfs.
    Exact(ExactArgs),
    /// Run the verification checks and report one line per check.
    Verify(VerifyArgs),
    /// Approximate the limit law of the normalised path length.
    Limit(LimitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatArg {
    Depth,
    Height,
    Ipl,
    Leaves,
    Subtree,
}

impl From<StatArg> for Statistic {
    fn from(s: StatArg) -> Self {
        match s {
            StatArg::Depth => Statistic::DepthLast,
            StatArg::Height => Statistic::Height,
            StatArg::Ipl => Statistic::Ipl,
            StatArg::Leaves => Statistic::Leaves,
            StatArg::Subtree => Statistic::Subtree2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Exact,
    Statistical,
    All,
}

fn positive_theta(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(format!("theta must be positive and finite, got {s}"))
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn population_size(s: &str) -> Result<usize, String> {
    let m: usize = s.parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
    if m < MIN_POPULATION {
        Err(format!("population must be at least {MIN_POPULATION}"))
    } else {
        Ok(m)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = positive_theta, required_unless_present = "extremal")]
    pub theta: Option<f64>,
    /// Grow the theta = 0 tree (root plus one forced child) instead.
    #[arg(long, conflicts_with = "theta")]
    pub extremal: bool,
    #[arg(long, value_parser = at_least_one)]
    pub nodes: usize,
    #[arg(long, value_parser = at_least_one)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "depth")]
    pub stat: StatArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = at_least_one)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long, value_parser = positive_theta, default_value = "1")]
    pub theta: f64,
    #[arg(long, value_parser = at_least_one)]
    pub nodes: usize,
    #[arg(long, value_enum)]
    pub stat: StatArg,
    /// Emit the full pmf as value,probability rows.
    #[arg(long)]
    pub pmf: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub tier: TierArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = at_least_one)]
    pub workers: Option<usize>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long, value_parser = positive_theta, default_value = "1")]
    pub theta: f64,
    #[arg(long, value_parser = population_size, default_value = "100000")]
    pub population: usize,
    #[arg(long, default_value_t = 40)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = at_least_one)]
    pub workers: Option<usize>,
}

/// Failures split by exit code: bad flag combinations exit 2, the rest 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<hoppetree::Error> for CliError {
    fn from(e: hoppetree::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Dispatches a parsed command. Returns `Ok(false)` when verification ran
/// but some check failed.
pub fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Simulate(a) => with_workers(a.workers, || simulate(&a)).map(|_| true),
        Command::Exact(a) => exact(&a).map(|_| true),
        Command::Verify(a) => with_workers(a.workers, || run_verify(&a)),
        Command::Limit(a) => with_workers(a.workers, || limit(&a)).map(|_| true),
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.into()))?;
    pool.install(f)
}

fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Shortest round-trip decimal, independent of locale.
fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Serialize)]
struct SummaryJson {
    count: usize,
    mean: f64,
    variance: f64,
    std_error: f64,
    min: f64,
    max: f64,
}

impl From<&StatSummary> for SummaryJson {
    fn from(s: &StatSummary) -> Self {
        Self {
            count: s.count,
            mean: s.mean,
            variance: s.variance,
            std_error: s.std_error(),
            min: s.min,
            max: s.max,
        }
    }
}

#[derive(Serialize)]
struct SimulateJson<'a> {
    schema: &'static str,
    command: &'static str,
    theta: f64,
    extremal: bool,
    nodes: usize,
    replicates: usize,
    seed: u64,
    statistic: &'a str,
    summary: SummaryJson,
    values: Vec<u64>,
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let stat = Statistic::from(a.stat);
    let cfg = if a.extremal {
        ExperimentConfig::extremal(a.nodes, a.replicates, a.seed)?
    } else {
        ExperimentConfig::new(a.theta.expect("clap requires theta"), a.nodes, a.replicates, a.seed)?
    };
    let sample = run_experiment(&cfg);
    let values: Vec<u64> = sample.records.iter().filter_map(|r| r.get_int(stat)).collect();
    let summary = sample
        .summary(stat)
        .ok_or_else(|| anyhow!("statistic {} is undefined for n = {}", stat, a.nodes))?;
    let theta = cfg.params.theta();

    let mut w = open_out(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            writeln!(w, "replicate,{}", stat.name())?;
            for (r, v) in values.iter().enumerate() {
                writeln!(w, "{r},{v}")?;
            }
            writeln!(w)?;
            writeln!(w, "statistic,theta,nodes,replicates,seed,count,mean,variance,std_error,min,max")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                stat.name(),
                num(theta),
                a.nodes,
                a.replicates,
                a.seed,
                summary.count,
                num(summary.mean),
                num(summary.variance),
                num(summary.std_error()),
                num(summary.min),
                num(summary.max)
            )?;
        }
        Format::Json => {
            let record = SimulateJson {
                schema: SCHEMA,
                command: "simulate",
                theta,
                extremal: a.extremal,
                nodes: a.nodes,
                replicates: a.replicates,
                seed: a.seed,
                statistic: stat.name(),
                summary: summary.into(),
                values,
            };
            serde_json::to_writer(&mut w, &record).context("writing JSON")?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ExactJson<'a> {
    schema: &'static str,
    command: &'static str,
    theta: f64,
    nodes: usize,
    statistic: &'a str,
    precision: &'static str,
    mean: f64,
    variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance_coefficient: Option<f64>,
}

struct ExactValues {
    precision: &'static str,
    mean: f64,
    variance: Option<f64>,
    variance_coefficient: Option<f64>,
}

fn exact_values(theta: f64, n: usize, stat: Statistic) -> CliResult<ExactValues> {
    let exact = |mean, variance| ExactValues {
        precision: "exact",
        mean,
        variance: Some(variance),
        variance_coefficient: None,
    };
    if n == 1 {
        // A lone root: every statistic but the subtree size is degenerate.
        return match stat {
            Statistic::Subtree2 => Err(anyhow!("subtree size is undefined for n = 1").into()),
            Statistic::Leaves => Ok(exact(1.0, 0.0)),
            _ => Ok(exact(0.0, 0.0)),
        };
    }
    let enumerable = n <= oracle::MAX_NODES;
    Ok(match stat {
        Statistic::DepthLast => {
            let m = depth_moments(theta, n)?;
            exact(m.mean, m.variance)
        }
        Statistic::Leaves => exact(leaf_mean_exact(theta, n)?, leaf_var_exact(theta, n)?),
        Statistic::Subtree2 => {
            let pmf = subtree_pmf(theta, n)?;
            exact(pmf.mean(), pmf.variance())
        }
        Statistic::Ipl => {
            let variance = if enumerable {
                Some(exact_distribution(theta, n, stat)?.variance())
            } else {
                None
            };
            ExactValues {
                precision: "exact",
                mean: ipl_mean_exact(theta, n)?,
                variance,
                variance_coefficient: Some(ipl_var_coefficient(theta)?),
            }
        }
        Statistic::Height if enumerable => {
            let pmf = exact_distribution(theta, n, stat)?;
            exact(pmf.mean(), pmf.variance())
        }
        Statistic::Height => ExactValues {
            precision: "asymptotic",
            mean: height_band(n as f64)?,
            variance: None,
            variance_coefficient: None,
        },
    })
}

fn subtree_pmf(theta: f64, n: usize) -> CliResult<Pmf> {
    if n > SUBTREE_PMF_MAX_NODES {
        return Err(anyhow!("subtree pmf supports n <= {SUBTREE_PMF_MAX_NODES}").into());
    }
    Ok(subtree_pmf_exact(theta, n)?)
}

fn exact_pmf(theta: f64, n: usize, stat: Statistic) -> CliResult<Pmf> {
    match stat {
        Statistic::DepthLast if n == 1 => Ok(Pmf::point(0)),
        Statistic::DepthLast => {
            if n > DEPTH_PMF_MAX_NODES {
                return Err(anyhow!("depth pmf supports n <= {DEPTH_PMF_MAX_NODES}").into());
            }
            Ok(depth_pmf_exact(theta, n)?)
        }
        Statistic::Subtree2 => subtree_pmf(theta, n),
        _ if (2..=oracle::MAX_NODES).contains(&n) => Ok(exact_distribution(theta, n, stat)?),
        _ => Err(CliError::Usage(format!(
            "--pmf for {} needs 2 <= n <= {}; only depth and subtree pmfs scale further",
            stat,
            oracle::MAX_NODES
        ))),
    }
}

pub fn exact(a: &ExactArgs) -> CliResult<()> {
    let stat = Statistic::from(a.stat);
    if a.pmf {
        let pmf = exact_pmf(a.theta, a.nodes, stat)?;
        let mut w = open_out(a.out.as_deref())?;
        match a.format {
            Format::Csv => {
                writeln!(w, "value,probability")?;
                for (k, p) in pmf.iter() {
                    writeln!(w, "{k},{}", num(p))?;
                }
            }
            Format::Json => {
                // Rows are streamed, so the object is assembled by hand.
                write!(
                    w,
                    "{{\"schema\":\"{SCHEMA}\",\"command\":\"exact\",\"theta\":{},\"nodes\":{},\"statistic\":\"{}\",\"pmf\":[",
                    num(a.theta),
                    a.nodes,
                    stat.name()
                )?;
                for (i, (k, p)) in pmf.iter().enumerate() {
                    let sep = if i == 0 { "" } else { "," };
                    write!(w, "{sep}[{k},{}]", num(p))?;
                }
                writeln!(w, "]}}")?;
            }
        }
        w.flush()?;
        return Ok(());
    }

    let v = exact_values(a.theta, a.nodes, stat)?;
    let mut w = open_out(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            writeln!(w, "statistic,theta,nodes,precision,mean,variance")?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                stat.name(),
                num(a.theta),
                a.nodes,
                v.precision,
                num(v.mean),
                v.variance.map(num).unwrap_or_default()
            )?;
        }
        Format::Json => {
            let record = ExactJson {
                schema: SCHEMA,
                command: "exact",
                theta: a.theta,
                nodes: a.nodes,
                statistic: stat.name(),
                precision: v.precision,
                mean: v.mean,
                variance: v.variance,
                variance_coefficient: v.variance_coefficient,
            };
            serde_json::to_writer(&mut w, &record).context("writing JSON")?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_verify(a: &VerifyArgs) -> CliResult<bool> {
    let tier = match a.tier {
        TierArg::Exact => verify::Tier::Exact,
        TierArg::Statistical => verify::Tier::Statistical,
        TierArg::All => verify::Tier::All,
    };
    let opts = verify::VerifyOptions {
        seed: a.seed,
        inject_fault: a.inject_fault,
    };
    let stdout = io::stdout();
    let checks = verify::run_tier(tier, opts, |c| {
        let mut out = stdout.lock();
        let _ = writeln!(out, "{c}");
        let _ = out.flush();
    })?;
    let failed = checks.iter().filter(|c| !c.pass()).count();
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(failed == 0)
}

#[derive(Serialize)]
struct StageJson {
    theta: f64,
    generations: usize,
    mean: f64,
    variance: f64,
    target_mean: f64,
    target_variance: f64,
    mean_drift: f64,
    variance_drift: f64,
    converged: bool,
}

impl StageJson {
    fn of(pop: &Population<f64>) -> CliResult<Self> {
        let (target_mean, target_variance) = limit_moments(pop.theta())?;
        let c = pop.convergence();
        Ok(Self {
            theta: pop.theta(),
            generations: pop.generation(),
            mean: pop.mean(),
            variance: pop.variance(),
            target_mean,
            target_variance,
            mean_drift: c.mean_drift,
            variance_drift: c.variance_drift,
            converged: c.converged,
        })
    }
}

#[derive(Serialize)]
struct LimitJson<'a> {
    schema: &'static str,
    command: &'static str,
    theta: f64,
    population: usize,
    iterations: usize,
    seed: u64,
    stages: Vec<StageJson>,
    values: &'a [f64],
}

pub fn limit(a: &LimitArgs) -> CliResult<()> {
    let base = picard_base::<f64>(a.population, a.iterations, a.seed)?;
    let mut stages = vec![StageJson::of(&base)?];
    let pop = if a.theta == 1.0 {
        base
    } else {
        let cfg = PicardConfig::new(a.theta, a.population, a.iterations, a.seed)?;
        let pop = picard_with_base(&cfg, &base)?;
        stages.push(StageJson::of(&pop)?);
        pop
    };
    for s in &stages {
        if !s.converged && a.iterations > 0 {
            eprintln!(
                "warning: stage theta={} still drifting after {} generations (mean {:.2e}, variance {:.2e})",
                s.theta, s.generations, s.mean_drift, s.variance_drift
            );
        }
    }
    let record = LimitJson {
        schema: SCHEMA,
        command: "limit",
        theta: a.theta,
        population: a.population,
        iterations: a.iterations,
        seed: a.seed,
        stages,
        values: pop.values(),
    };
    let mut w = open_out(a.out.as_deref())?;
    serde_json::to_writer(&mut w, &record).context("writing JSON")?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
