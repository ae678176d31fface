//! Growth of Hoppe trees and extraction of their statistics.
//!
//! Nodes are labelled by insertion rank starting at 1 (the root). When node
//! `k + 1` joins a `k`-node tree it attaches to the root with probability
//! `theta / (theta + k - 1)` and to each non-root node with probability
//! `1 / (theta + k - 1)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Parameters of one tree realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    theta: f64,
    n: usize,
    seed: u64,
    extremal: bool,
}

impl TreeParams {
    pub fn new(theta: f64, n: usize, seed: u64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidTheta(theta));
        }
        if n < 1 {
            return Err(Error::TooFewNodes { n, min: 1 });
        }
        Ok(Self {
            theta,
            n,
            seed,
            extremal: false,
        })
    }

    /// The `theta = 0` tree: the root gets exactly one child (node 2) and all
    /// later nodes attach uniformly to non-root nodes. Only meaningful for
    /// height comparisons.
    pub fn extremal(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes { n, min: 2 });
        }
        Ok(Self {
            theta: 0.0,
            n,
            seed,
            extremal: true,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_extremal(&self) -> bool {
        self.extremal
    }

    /// The default stream for these parameters.
    pub fn stream(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Parent sequence of a grown tree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HoppeTree {
    // parent[i - 1] is the parent label of node i; the root stores 0.
    parent: Vec<u32>,
}

impl HoppeTree {
    /// Builds a tree from parent labels of nodes `2..=n` in order.
    pub fn from_parents(parents: &[usize]) -> Result<Self> {
        let mut parent = Vec::with_capacity(parents.len() + 1);
        parent.push(0);
        for (idx, &p) in parents.iter().enumerate() {
            let node = idx + 2;
            if p < 1 || p >= node {
                return Err(Error::InvalidArgument(format!(
                    "parent of node {node} must lie in 1..{node}, got {p}"
                )));
            }
            parent.push(p as u32);
        }
        Ok(Self { parent })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Parent label of node `i`, `None` for the root or out-of-range labels.
    pub fn parent(&self, i: usize) -> Option<usize> {
        match i {
            0 | 1 => None,
            _ => self.parent.get(i - 1).map(|&p| p as usize),
        }
    }

    /// Parent labels of nodes `2..=n`.
    pub fn parents(&self) -> impl Iterator<Item = usize> + '_ {
        self.parent.iter().skip(1).map(|&p| p as usize)
    }

    /// Children lists indexed by label (index 0 unused).
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len() + 1];
        for (i, p) in self.parents().enumerate() {
            out[p].push(i + 2);
        }
        out
    }
}

/// Grows a tree with the given stream. One uniform draw per insertion.
pub fn grow_tree<R: Rng + ?Sized>(params: &TreeParams, rng: &mut R) -> HoppeTree {
    let mut tree = HoppeTree::default();
    grow_tree_into(params, rng, &mut tree);
    tree
}

/// As [`grow_tree`], reusing the buffer of `tree`.
pub fn grow_tree_into<R: Rng + ?Sized>(params: &TreeParams, rng: &mut R, tree: &mut HoppeTree) {
    let theta = params.theta;
    let parent = &mut tree.parent;
    parent.clear();
    parent.reserve(params.n);
    parent.push(0);
    for k in 1..params.n {
        // Inserting node k + 1 into a k-node tree.
        let label = if params.extremal && k == 1 {
            1
        } else {
            let u = rng.random::<f64>() * (theta + (k - 1) as f64);
            if u < theta {
                1
            } else {
                // Clamp guards the u == total rounding edge.
                ((u - theta) as usize + 2).min(k)
            }
        };
        parent.push(label as u32);
    }
}

/// The tracked statistics of a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeStats {
    /// Depth of the last inserted node.
    pub depth_last: u32,
    pub height: u32,
    /// Internal path length, the sum of all depths.
    pub ipl: u64,
    pub leaves: u32,
    /// Size of the subtree rooted at node 2; absent for the single-node tree.
    pub subtree2: Option<u32>,
}

impl TreeStats {
    pub fn get(&self, stat: Statistic) -> Option<f64> {
        match stat {
            Statistic::DepthLast => Some(self.depth_last as f64),
            Statistic::Height => Some(self.height as f64),
            Statistic::Ipl => Some(self.ipl as f64),
            Statistic::Leaves => Some(self.leaves as f64),
            Statistic::Subtree2 => self.subtree2.map(f64::from),
        }
    }

    /// Integer value of a statistic, as used for exact pmfs.
    pub fn get_int(&self, stat: Statistic) -> Option<u64> {
        match stat {
            Statistic::DepthLast => Some(self.depth_last as u64),
            Statistic::Height => Some(self.height as u64),
            Statistic::Ipl => Some(self.ipl),
            Statistic::Leaves => Some(self.leaves as u64),
            Statistic::Subtree2 => self.subtree2.map(u64::from),
        }
    }
}

/// Reusable buffers for [`tree_stats_with`].
#[derive(Debug, Default)]
pub struct StatsScratch {
    depth: Vec<u32>,
    // bit 0: has a child, bit 1: inside the subtree of node 2
    flags: Vec<u8>,
}

pub fn tree_stats(tree: &HoppeTree) -> TreeStats {
    tree_stats_with(tree, &mut StatsScratch::default())
}

/// One forward pass over the parent sequence; labels increase along every
/// root path so each parent is finished before its children.
pub fn tree_stats_with(tree: &HoppeTree, scratch: &mut StatsScratch) -> TreeStats {
    const HAS_CHILD: u8 = 1;
    const IN_SUB2: u8 = 2;

    let n = tree.len();
    let depth = &mut scratch.depth;
    let flags = &mut scratch.flags;
    depth.clear();
    depth.resize(n, 0);
    flags.clear();
    flags.resize(n, 0);

    let mut height = 0u32;
    let mut ipl = 0u64;
    let mut sub2 = 0u32;
    for i in 1..n {
        let p = tree.parent[i] as usize - 1;
        let d = depth[p] + 1;
        depth[i] = d;
        flags[p] |= HAS_CHILD;
        if i == 1 || flags[p] & IN_SUB2 != 0 {
            flags[i] |= IN_SUB2;
            sub2 += 1;
        }
        height = height.max(d);
        ipl += d as u64;
    }
    let leaves = if n == 1 {
        1
    } else {
        flags.iter().filter(|&&f| f & HAS_CHILD == 0).count() as u32
    };
    TreeStats {
        depth_last: depth.last().copied().unwrap_or(0),
        height,
        ipl,
        leaves,
        subtree2: (n >= 2).then_some(sub2),
    }
}

/// Whether node `i` lies on the root path of node `j`, for `1 <= i < j <= n`.
pub fn is_ancestor(tree: &HoppeTree, i: usize, j: usize) -> Result<bool> {
    let n = tree.len();
    if i < 1 || i >= j || j > n {
        return Err(Error::InvalidLabels { i, j, n });
    }
    let mut v = j;
    while v > i {
        v = tree.parent[v - 1] as usize;
    }
    Ok(v == i)
}

/// The five statistics tracked per tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    DepthLast,
    Height,
    Ipl,
    Leaves,
    Subtree2,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::DepthLast,
        Statistic::Height,
        Statistic::Ipl,
        Statistic::Leaves,
        Statistic::Subtree2,
    ];

    /// Short name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Statistic::DepthLast => "depth",
            Statistic::Height => "height",
            Statistic::Ipl => "ipl",
            Statistic::Leaves => "leaves",
            Statistic::Subtree2 => "subtree",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "depth" | "depth_last" => Statistic::DepthLast,
            "height" => Statistic::Height,
            "ipl" => Statistic::Ipl,
            "leaves" => Statistic::Leaves,
            "subtree" | "subtree2" => Statistic::Subtree2,
            other => {
                return Err(Error::InvalidArgument(format!("unknown statistic '{other}'")))
            }
        })
    }
}
