//! Exhaustive enumeration of insertion histories for small trees.
//!
//! A history is a parent sequence with `parent[i] < i`; there are `(n-1)!` of
//! them. Its probability is the product over insertions of the chosen node's
//! weight (`theta` for the root, one otherwise) divided by `theta + k - 1`.
//! Every exact law derived here is independent of the closed forms in
//! [`crate::formulas`] and serves as their ground truth.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formulas::DiscreteDistribution;
use crate::scalar::{KahanSum, Scalar};
use crate::tree::{is_ancestor, tree_stats, HoppeTree, Statistic};

/// Largest tree size accepted by [`enumerate`].
pub const MAX_NODES: usize = 10;

/// One insertion history and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryAtom<T> {
    pub tree: HoppeTree,
    pub probability: T,
}

fn check(theta: f64, n: usize, min: usize, max: usize) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidTheta(theta));
    }
    if n < min {
        return Err(Error::TooFewNodes { n, min });
    }
    if n > max {
        return Err(Error::TooLarge {
            what: "history enumeration",
            n,
            max,
        });
    }
    Ok(())
}

/// Calls `visit` for every history of an `n`-node tree, in depth-first order
/// with the last insertion varying fastest.
pub fn for_each_history<T: Scalar, F>(theta: T, n: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize], T),
{
    check(theta.as_f64(), n, 2, MAX_NODES)?;
    let mut parents = Vec::with_capacity(n - 1);
    descend(theta, n, &mut parents, T::one(), &mut visit);
    Ok(())
}

fn descend<T: Scalar, F: FnMut(&[usize], T)>(
    theta: T,
    n: usize,
    parents: &mut Vec<usize>,
    prob: T,
    visit: &mut F,
) {
    // parents.len() + 1 nodes exist; insert the next one.
    let k = parents.len() + 1;
    if k == n {
        visit(parents, prob);
        return;
    }
    let total = theta + T::of_usize(k - 1);
    for p in 1..=k {
        let w = if p == 1 { theta } else { T::one() };
        parents.push(p);
        descend(theta, n, parents, prob * w / total, visit);
        parents.pop();
    }
}

/// All `(n-1)!` histories of an `n`-node tree, `2 <= n <= 10`.
pub fn enumerate<T: Scalar>(theta: T, n: usize) -> Result<Vec<HistoryAtom<T>>> {
    let mut out = Vec::new();
    for_each_history(theta, n, |parents, probability| {
        out.push(HistoryAtom {
            tree: HoppeTree::from_parents(parents).expect("enumerated parents are valid"),
            probability,
        });
    })?;
    Ok(out)
}

/// Exact pmf of one statistic over all histories.
pub fn exact_distribution<T: Scalar>(
    theta: T,
    n: usize,
    statistic: Statistic,
) -> Result<DiscreteDistribution<T>> {
    let mut table: BTreeMap<u64, KahanSum<T>> = BTreeMap::new();
    for_each_history(theta, n, |parents, prob| {
        let tree = HoppeTree::from_parents(parents).expect("enumerated parents are valid");
        let value = tree_stats(&tree)
            .get_int(statistic)
            .expect("n >= 2 defines every statistic");
        table.entry(value).or_insert_with(KahanSum::new).add(prob);
    })?;
    let lo = *table.keys().next().expect("at least one history");
    let hi = *table.keys().next_back().expect("at least one history");
    let mut pmf = vec![T::zero(); (hi - lo + 1) as usize];
    for (v, mass) in table {
        pmf[(v - lo) as usize] = mass.value();
    }
    Ok(DiscreteDistribution::from_masses(lo as i64, pmf))
}

/// `E[X^order]` for `order` 1 or 2.
pub fn exact_moment<T: Scalar>(theta: T, n: usize, statistic: Statistic, order: u32) -> Result<T> {
    if order != 1 && order != 2 {
        return Err(Error::InvalidArgument(format!("moment order must be 1 or 2, got {order}")));
    }
    let dist = exact_distribution(theta, n, statistic)?;
    Ok(KahanSum::from_iter(dist.iter().map(|(v, p)| {
        let x = T::from_i64(v).unwrap();
        if order == 1 {
            x * p
        } else {
            x * x * p
        }
    }))
    .value())
}

/// Exact ancestor probability `P(i is an ancestor of n)` and expected number
/// of descendants of `i` among nodes `1..=n-1`, by enumeration.
pub fn exact_ancestor_stats<T: Scalar>(theta: T, i: usize, n: usize) -> Result<(T, T)> {
    if i < 2 || n <= i {
        return Err(Error::InvalidArgument(format!(
            "ancestor stats need 2 <= i < n, got i={i}, n={n}"
        )));
    }
    let mut prob = KahanSum::new();
    let mut desc = KahanSum::new();
    for_each_history(theta, n, |parents, p| {
        let tree = HoppeTree::from_parents(parents).expect("enumerated parents are valid");
        if is_ancestor(&tree, i, n).expect("labels in range") {
            prob.add(p);
        }
        let count = (i + 1..n)
            .filter(|&j| is_ancestor(&tree, i, j).expect("labels in range"))
            .count();
        desc.add(p * T::of_usize(count));
    })?;
    Ok((prob.value(), desc.value()))
}

/// Maximum conditional-expectation residuals of the three martingale-type
/// identities, taken over all length-(n-1) prefixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleResiduals<T> {
    /// `|E[Z_n | prefix] - Z_{n-1}|` with `Z_m = I_m/(theta+m-1) - sum_{i<m} 1/(theta+i)`.
    pub ipl: T,
    /// `|E[X_n | prefix] - X_{n-1}|` with `X_m = (theta+m-2)(L_m - E[L_m])`.
    pub leaves: T,
    /// `|E[D_n | prefix] - (1 + I_{n-1}/(theta+n-2))|`.
    pub depth: T,
}

fn ipl_martingale<T: Scalar>(theta: T, m: usize, ipl: u64) -> T {
    let h = KahanSum::from_iter((1..m).map(|i| (theta + T::of_usize(i)).recip())).value();
    T::from_u64(ipl).unwrap() / (theta + T::of_usize(m - 1)) - h
}

fn leaf_martingale<T: Scalar>(theta: T, m: usize, leaves: u32) -> T {
    // Mean written out here rather than borrowed from formulas.
    let mf = T::of_usize(m - 1);
    let two = T::lit(2.0);
    let mean = mf / two + theta * mf / (two * (theta + T::of_usize(m - 2)));
    (theta + T::of_usize(m - 2)) * (T::from_u32(leaves).unwrap() - mean)
}

/// Groups the `n`-node histories by their `(n-1)`-node prefix and measures
/// how far each conditional expectation is from the martingale value.
pub fn martingale_residuals<T: Scalar>(theta: T, n: usize) -> Result<MartingaleResiduals<T>> {
    check(theta.as_f64(), n, 3, 8)?;
    let atoms = enumerate(theta, n)?;
    let mut out = MartingaleResiduals {
        ipl: T::zero(),
        leaves: T::zero(),
        depth: T::zero(),
    };
    // Depth-first order keeps histories sharing a prefix contiguous.
    for group in atoms.chunk_by(|a, b| {
        a.tree.parents().take(n - 2).eq(b.tree.parents().take(n - 2))
    }) {
        let prefix_parents: Vec<usize> = group[0].tree.parents().take(n - 2).collect();
        let prefix = tree_stats(&HoppeTree::from_parents(&prefix_parents)?);

        let mass = KahanSum::from_iter(group.iter().map(|a| a.probability)).value();
        let mut z = KahanSum::new();
        let mut x = KahanSum::new();
        let mut d = KahanSum::new();
        for atom in group {
            let s = tree_stats(&atom.tree);
            let w = atom.probability / mass;
            z.add(w * ipl_martingale(theta, n, s.ipl));
            x.add(w * leaf_martingale(theta, n, s.leaves));
            d.add(w * T::from_u32(s.depth_last).unwrap());
        }
        let z_prev = ipl_martingale(theta, n - 1, prefix.ipl);
        let x_prev = leaf_martingale(theta, n - 1, prefix.leaves);
        let d_pred =
            T::one() + T::from_u64(prefix.ipl).unwrap() / (theta + T::of_usize(n - 2));
        out.ipl = out.ipl.max((z.value() - z_prev).abs());
        out.leaves = out.leaves.max((x.value() - x_prev).abs());
        out.depth = out.depth.max((d.value() - d_pred).abs());
    }
    Ok(out)
}
