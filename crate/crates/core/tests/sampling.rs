//! Monte Carlo checks of the generator and samplers against exact laws.

use hoppetree::formulas::{ancestor_stats, depth_pmf_exact, leaf_mean_exact};
use hoppetree::limitdist::{advance, picard_base, picard_with_base, sample_beta, PicardConfig};
use hoppetree::montecarlo::{
    empirical_pmf, ks_statistic, run_experiment, two_sample_ks, ExperimentConfig,
};
use hoppetree::{grow_tree, is_ancestor, Statistic, TreeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn third_node_picks_the_root_with_weight_theta() {
    let params = TreeParams::new(2.0, 3, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws = 100_000;
    let on_root = (0..draws)
        .filter(|_| grow_tree(&params, &mut rng).parent(3) == Some(1))
        .count() as f64
        / draws as f64;
    let p = 2.0 / 3.0;
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    assert!((on_root - p).abs() < 4.0 * se, "{on_root}");
}

#[test]
fn ancestor_frequencies_match_closed_form() {
    let (theta, n, draws) = (1.5, 20, 100_000);
    let params = TreeParams::new(theta, n, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let nodes = [2usize, 5, 10, 19];
    let mut hits = [0usize; 4];
    for _ in 0..draws {
        let tree = grow_tree(&params, &mut rng);
        for (h, &i) in hits.iter_mut().zip(&nodes) {
            *h += is_ancestor(&tree, i, n).unwrap() as usize;
        }
    }
    for (h, &i) in hits.iter().zip(&nodes) {
        let p = ancestor_stats(theta, i, n).unwrap().prob;
        let freq = *h as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "i={i}: {freq} vs {p}");
    }
}

#[test]
fn simulated_depth_law_is_close_to_exact() {
    let cfg = ExperimentConfig::new(1.0, 50, 1_000_000, 17).unwrap();
    let depths: Vec<u64> = run_experiment(&cfg)
        .records
        .iter()
        .map(|r| r.depth_last as u64)
        .collect();
    let empirical = empirical_pmf(&depths).unwrap();
    let tv = empirical.total_variation(&depth_pmf_exact(1.0, 50).unwrap());
    assert!(tv <= 0.01, "{tv}");
}

#[test]
fn simulated_leaf_mean_is_unbiased() {
    let (theta, n) = (0.5, 10_000);
    let s = run_experiment(&ExperimentConfig::new(theta, n, 2_000, 23).unwrap());
    let sum = s.summary(Statistic::Leaves).unwrap();
    let z = (sum.mean - leaf_mean_exact(theta, n).unwrap()) / sum.std_error();
    assert!(z.abs() < 4.0, "z = {z}");
}

#[test]
fn beta_sampler_matches_its_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut u: Vec<f64> = (0..100_000).map(|_| sample_beta(1.0, &mut rng)).collect();
    u.sort_by(f64::total_cmp);
    let ks = ks_statistic(&u, |x| x.clamp(0.0, 1.0)).unwrap();
    assert!(ks <= 0.006, "{ks}");

    let draws = 100_000;
    let b: Vec<f64> = (0..draws).map(|_| sample_beta(2.0, &mut rng)).collect();
    let mean = b.iter().sum::<f64>() / draws as f64;
    // Beta(1, 2) has variance 1/18.
    let se = (1.0f64 / 18.0 / draws as f64).sqrt();
    assert!((mean - 1.0 / 3.0).abs() < 4.0 * se, "{mean}");
}

#[test]
fn picard_population_is_a_fixed_point() {
    let (m, k, seed) = (20_000, 30, 4);
    let base = picard_base::<f64>(m, k, seed).unwrap();
    let pop = picard_with_base(&PicardConfig::new(2.0, m, k, seed).unwrap(), &base).unwrap();
    let next = advance(&pop, Some(&base), seed).unwrap();
    assert!((next.mean() - pop.mean()).abs() < 5e-3);
    assert!((next.variance() - pop.variance()).abs() < 1e-2);
    let ks = two_sample_ks(&pop.sorted(), &next.sorted()).unwrap();
    assert!(ks <= 0.03, "{ks}");
}
