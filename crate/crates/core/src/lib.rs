//! Hoppe trees: random trees grown by weighted attachment where the root
//! carries weight `theta` and every other node weight one.
//!
//! The crate covers four routes to the same laws:
//!
//! * [`tree`] grows trees and extracts the tracked statistics,
//! * [`formulas`] evaluates exact and asymptotic closed forms (built on [`specfun`]),
//! * [`oracle`] enumerates every insertion history for small trees,
//! * [`montecarlo`] and [`limitdist`] replicate trees and sample the limit law of
//!   the normalised internal path length.
//!
//! The closed-form modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod error;
pub mod formulas;
pub mod limitdist;
pub mod montecarlo;
pub mod oracle;
pub mod scalar;
pub mod specfun;
pub mod tree;

pub use error::{Error, Result};
pub use scalar::{KahanSum, Scalar};
pub use tree::{grow_tree, is_ancestor, tree_stats, HoppeTree, Statistic, TreeParams, TreeStats};

/// Exact pmf over the integers with `f64` masses.
pub type Pmf = formulas::DiscreteDistribution<f64>;
/// Mean/variance report with `f64` values.
pub type Moments = formulas::MomentReport<f64>;
/// One enumerated insertion history with an `f64` probability.
pub type History = oracle::HistoryAtom<f64>;
/// Picard population of `f64` values.
pub type LimitPopulation = limitdist::Population<f64>;
