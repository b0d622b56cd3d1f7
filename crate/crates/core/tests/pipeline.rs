use approx::assert_abs_diff_eq;
use iaa_ensemble::cart::{DecisionTree, TreeParams};
use iaa_ensemble::data::{Dataset, Label};
use iaa_ensemble::ensemble::{
    classify_majority_vote, collect_probabilities, repeat_stream, BaggedEnsemble, EnsembleConfig,
};
use iaa_ensemble::eval::bayes::{bayesian_signed_rank, SignedRankConfig};
use iaa_ensemble::eval::{run_experiment, Method, Metric};
use rand::Rng;
use statrs::distribution::{Beta, ContinuousCDF};

fn noisy(n: usize, features: usize, seed: u64, label: impl Fn(usize) -> Label) -> Dataset {
    let mut rng = repeat_stream(seed, 99);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..features).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Dataset::from_xy(&rows, (0..n).map(label).collect()).unwrap()
}

#[test]
fn pure_training_data_makes_methods_agree() {
    for (main, seed) in [(true, 1), (false, 2)] {
        let train = noisy(40, 3, seed, |_| Label::from_is_main(main));
        let test = noisy(25, 3, seed + 10, |i| Label::from_is_main(i % 2 == 0));
        let config = EnsembleConfig::with_bootstraps(7, seed);
        let ens = BaggedEnsemble::train(&train, &config, &mut repeat_stream(seed, 0)).unwrap();
        let expected = if main { 1.0 } else { 0.0 };
        for sample in test.rows() {
            let tableau = ens.tableau(sample).unwrap();
            assert!(tableau.rows().flatten().all(|&p| p == expected));
            let iaa = ens.classify_iaa(sample).unwrap();
            assert_eq!(iaa.centroid, expected);
            assert_eq!(iaa.label, ens.classify_majority_vote(sample).unwrap());
            assert_eq!(iaa.label.is_main(), main);
        }
    }
}

#[test]
fn free_functions_use_the_same_trees() {
    let train = noisy(60, 4, 3, |i| Label::from_is_main(i % 3 == 0));
    let config = EnsembleConfig::with_bootstraps(9, 5);
    let sample = [0.1, -0.2, 0.3, 0.0];
    let ens = BaggedEnsemble::train(&train, &config, &mut repeat_stream(5, 0)).unwrap();
    let tableau =
        collect_probabilities(&train, &sample, &config, &mut repeat_stream(5, 0)).unwrap();
    assert_eq!(tableau, ens.tableau(&sample).unwrap());
    let vote = classify_majority_vote(&train, &sample, &config, &mut repeat_stream(5, 0)).unwrap();
    assert_eq!(vote, ens.classify_majority_vote(&sample).unwrap());

    // tree (i, j) is exactly a fresh tree on bootstrap j without feature i
    for j in 0..config.n_bootstraps {
        for i in 0..4 {
            let mask: Vec<usize> = (0..4).filter(|&f| f != i).collect();
            let fresh =
                DecisionTree::train_on_rows(&train, ens.bootstrap(j), &mask, TreeParams::default())
                    .unwrap();
            assert_eq!(&fresh, ens.tree(i, j));
        }
    }
}

#[test]
fn pipeline_is_seed_determined() {
    let train = noisy(80, 3, 7, |i| Label::from_is_main(i % 2 == 0));
    let test = noisy(30, 3, 8, |i| Label::from_is_main(i % 2 == 1));
    let config = EnsembleConfig::with_bootstraps(5, 11);
    let a = run_experiment("x", &train, &test, &config, 4).unwrap();
    let b = run_experiment("x", &train, &test, &config, 4).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let c = pool.install(|| run_experiment("x", &train, &test, &config, 4).unwrap());
    assert_eq!(a, c);
    let other = EnsembleConfig::with_bootstraps(5, 12);
    assert_ne!(a, run_experiment("x", &train, &test, &other, 4).unwrap());
}

#[test]
fn reported_means_match_records() {
    let train = noisy(50, 3, 9, |i| Label::from_is_main(i % 4 != 0));
    let test = noisy(20, 3, 10, |i| Label::from_is_main(i % 4 != 1));
    let r = run_experiment(
        "x",
        &train,
        &test,
        &EnsembleConfig::with_bootstraps(4, 1),
        6,
    )
    .unwrap();
    assert_eq!(r.records.len(), 12);
    for method in Method::ALL {
        assert_eq!(r.records_for(method).count(), 6);
        let manual: f64 = r.records_for(method).map(|x| x.accuracy).sum::<f64>() / 6.0;
        assert_abs_diff_eq!(r.mean(method, Metric::Accuracy), manual, epsilon = 1e-12);
        let manual: f64 = r.records_for(method).map(|x| x.f_score).sum::<f64>() / 6.0;
        assert_abs_diff_eq!(r.mean(method, Metric::FScore), manual, epsilon = 1e-12);
    }
}

#[test]
fn positive_shift_matches_beta_oracle() {
    // With z_0 = 0 and ten differences of +0.1, only the (0, 0) pair lands in
    // the rope, so theta_rope = w_0^2 and "right" wins iff w_0 < 1/sqrt(2),
    // where w_0 ~ Beta(s, q).
    for (q, s) in [(10usize, 0.5), (1, 0.5), (3, 2.0)] {
        let cfg = SignedRankConfig {
            prior_weight: s,
            mc_samples: 50_000,
            ..Default::default()
        };
        let post =
            bayesian_signed_rank(&vec![0.1; q], &cfg, &mut repeat_stream(17, q as u64)).unwrap();
        let exact = Beta::new(s, q as f64).unwrap().cdf(1.0 / 2f64.sqrt());
        let se = (exact * (1.0 - exact) / 50_000.0).sqrt();
        assert!(
            (post.p_right - exact).abs() <= 5.0 * se + 1e-4,
            "q={q} s={s}: {} vs {exact}",
            post.p_right
        );
        assert_abs_diff_eq!(post.p_left, 0.0);
    }
}

#[test]
fn mirrored_inputs_with_paired_stream() {
    let diffs = [0.03, -0.01, 0.02, 0.05, -0.004, 0.0, 0.012];
    let neg: Vec<f64> = diffs.iter().map(|d| -d).collect();
    let cfg = SignedRankConfig::default();
    let a = bayesian_signed_rank(&diffs, &cfg, &mut repeat_stream(3, 0)).unwrap();
    let b = bayesian_signed_rank(&neg, &cfg, &mut repeat_stream(3, 0)).unwrap();
    let tol = 2.0 / (cfg.mc_samples as f64).sqrt();
    assert!((a.p_left - b.p_right).abs() <= tol);
    assert!((a.p_right - b.p_left).abs() <= tol);
    assert!((a.p_rope - b.p_rope).abs() <= tol);
}
