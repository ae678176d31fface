//! Closed forms against brute-force enumeration of insertion histories.

use hoppetree::formulas::{
    ancestor_stats, depth_moments, depth_pmf_exact, ipl_mean_exact, leaf_mean_exact, leaf_var_exact,
    subtree_pmf_exact,
};
use hoppetree::oracle::{enumerate, exact_ancestor_stats, exact_distribution, exact_moment};
use hoppetree::{tree_stats, KahanSum, Statistic};
use proptest::prelude::*;

const THETAS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

fn variance(theta: f64, n: usize, stat: Statistic) -> f64 {
    let m1 = exact_moment(theta, n, stat, 1).unwrap();
    exact_moment(theta, n, stat, 2).unwrap() - m1 * m1
}

#[test]
fn history_probabilities_sum_to_one() {
    for theta in THETAS {
        for n in 2..=8 {
            let atoms = enumerate(theta, n).unwrap();
            assert_eq!(atoms.len(), (1..n).product::<usize>());
            let total = KahanSum::from_iter(atoms.iter().map(|a| a.probability)).value();
            assert!((total - 1.0).abs() < 1e-13, "theta={theta} n={n}");
        }
    }
}

#[test]
fn depth_law_matches_enumeration() {
    for theta in THETAS {
        for n in 2..=9 {
            let tv = exact_distribution(theta, n, Statistic::DepthLast)
                .unwrap()
                .total_variation(&depth_pmf_exact(theta, n).unwrap());
            assert!(tv <= 1e-12, "theta={theta} n={n}: {tv:e}");
        }
    }
}

#[test]
fn moments_match_enumeration() {
    for theta in THETAS {
        for n in 2..=9 {
            let d = depth_moments(theta, n).unwrap();
            assert!((d.mean - exact_moment(theta, n, Statistic::DepthLast, 1).unwrap()).abs() < 1e-10);
            assert!((d.variance - variance(theta, n, Statistic::DepthLast)).abs() < 1e-10);
            let lm = leaf_mean_exact(theta, n).unwrap();
            assert!((lm - exact_moment(theta, n, Statistic::Leaves, 1).unwrap()).abs() < 1e-10);
            let lv = leaf_var_exact(theta, n).unwrap();
            assert!((lv - variance(theta, n, Statistic::Leaves)).abs() < 1e-10);
            let im = ipl_mean_exact(theta, n).unwrap();
            assert!((im - exact_moment(theta, n, Statistic::Ipl, 1).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn subtree_and_ancestor_laws_match_enumeration() {
    for theta in THETAS {
        for n in 2..=9 {
            let tv = exact_distribution(theta, n, Statistic::Subtree2)
                .unwrap()
                .total_variation(&subtree_pmf_exact(theta, n).unwrap());
            assert!(tv <= 1e-12, "theta={theta} n={n}: {tv:e}");
            for i in 2..n {
                let closed = ancestor_stats(theta, i, n).unwrap();
                let (p, desc) = exact_ancestor_stats(theta, i, n).unwrap();
                assert!((closed.prob - p).abs() < 1e-12);
                assert!((closed.expected_descendants - desc).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let d32 = depth_pmf_exact(2.0f32, 9).unwrap();
    let d64 = depth_pmf_exact(2.0f64, 9).unwrap();
    for ((k32, p32), (k64, p64)) in d32.iter().zip(d64.iter()) {
        assert_eq!(k32, k64);
        assert!((p32 as f64 - p64).abs() < 1e-6);
    }
    let l32 = leaf_var_exact(0.5f32, 200).unwrap() as f64;
    assert!((l32 - leaf_var_exact(0.5f64, 200).unwrap()).abs() < 1e-3);
}

#[test]
fn enumerated_statistics_respect_their_ranges() {
    for atom in enumerate(1.5f64, 7).unwrap() {
        let s = tree_stats(&atom.tree);
        assert!(s.depth_last <= s.height && s.height <= 6);
        assert!(s.ipl >= s.height as u64);
        assert!((1..=6).contains(&s.leaves));
        assert!((1..=6).contains(&s.subtree2.unwrap()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_forms_match_enumeration_for_any_theta(theta in 0.05f64..20.0, n in 2usize..=7) {
        let tv = exact_distribution(theta, n, Statistic::DepthLast)
            .unwrap()
            .total_variation(&depth_pmf_exact(theta, n).unwrap());
        prop_assert!(tv <= 1e-12);
        let lm = leaf_mean_exact(theta, n).unwrap();
        prop_assert!((lm - exact_moment(theta, n, Statistic::Leaves, 1).unwrap()).abs() < 1e-10);
        let lv = leaf_var_exact(theta, n).unwrap();
        prop_assert!((lv - variance(theta, n, Statistic::Leaves)).abs() < 1e-10);
        let im = ipl_mean_exact(theta, n).unwrap();
        prop_assert!((im - exact_moment(theta, n, Statistic::Ipl, 1).unwrap()).abs() < 1e-10);
    }
}
