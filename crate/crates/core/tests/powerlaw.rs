mod common;

use approx::assert_abs_diff_eq;
use common::DiscretePowerLaw;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sna_core::powerlaw::{fit_loglog_points, fit_mle, DegreeDistribution};

fn exact(alpha: f64, c: f64, lo: usize, hi: usize) -> Vec<(usize, f64)> {
    (lo..=hi).map(|d| (d, c * (d as f64).powf(alpha))).collect()
}

proptest! {
    #[test]
    fn loglog_is_exact_on_log_linear_input(alpha in -4.0f64..-0.5, c in 0.001f64..10.0, hi in 6usize..200) {
        let fit = fit_loglog_points(&exact(alpha, c, 3, hi), 3).unwrap();
        prop_assert!((fit.alpha - alpha).abs() < 1e-9);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
        prop_assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scaling_frequencies_keeps_slope(scale in 1e-3f64..1e3, seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(usize, f64)> = (3..40).map(|d| (d, rng.gen_range(0.001..1.0))).collect();
        let scaled: Vec<(usize, f64)> = pts.iter().map(|&(d, f)| (d, f * scale)).collect();
        let a = fit_loglog_points(&pts, 3).unwrap();
        let b = fit_loglog_points(&scaled, 3).unwrap();
        prop_assert!((a.alpha - b.alpha).abs() < 1e-12);
        prop_assert!((b.intercept - a.intercept - scale.ln()).abs() < 1e-9);
    }
}

fn mle_error(n: usize, seed: u64, dmin: usize) -> f64 {
    let sampler = DiscretePowerLaw::new(2.5, dmin, 100_000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<usize> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
    (fit_mle(&xs, dmin).unwrap().alpha + 2.5).abs()
}

#[test]
fn mle_error_shrinks_with_sample_size() {
    for dmin in [3, 6] {
        let mut votes = [0; 2];
        let mut means = [0.0; 3];
        for seed in 0..20 {
            let e = [
                mle_error(1_000, seed, dmin),
                mle_error(10_000, seed, dmin),
                mle_error(100_000, seed, dmin),
            ];
            for i in 0..3 {
                means[i] += e[i] / 20.0;
            }
            votes[0] += usize::from(e[1] < e[0]);
            votes[1] += usize::from(e[2] < e[1]);
        }
        assert!(votes.iter().all(|&v| v > 10), "dmin {dmin}: votes {votes:?}");
        assert!(means[0] > means[1] && means[1] > means[2], "dmin {dmin}: {means:?}");
    }
}

#[test]
fn mle_fit_uses_only_tail() {
    let sampler = DiscretePowerLaw::new(2.2, 5, 50_000);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tail: Vec<usize> = (0..20_000).map(|_| sampler.sample(&mut rng)).collect();
    let mut with_head = tail.clone();
    with_head.extend(std::iter::repeat_n(1, 5_000));
    let a = fit_mle(&tail, 5).unwrap();
    let b = fit_mle(&with_head, 5).unwrap();
    assert_eq!(a.alpha, b.alpha);
    assert_eq!(a.n_tail, b.n_tail);
}

#[test]
fn empirical_pmf_sums_to_one() {
    let sampler = DiscretePowerLaw::new(1.9, 1, 1_000);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<usize> = (0..5_000).map(|_| sampler.sample(&mut rng)).collect();
    let dist = DegreeDistribution::from_degrees(&xs);
    assert_abs_diff_eq!(dist.iter().map(|p| p.2).sum::<f64>(), 1.0, epsilon = 1e-12);
    assert!(dist.iter().all(|p| p.2 > 0.0));
    assert_eq!(dist.total(), 5_000);
}
