use iaa_ensemble::data::{load_dataset, Dataset, Label};
use iaa_ensemble::ensemble::{repeat_stream, uncertainty_intervals, ProbabilityTableau};
use iaa_ensemble::eval::bayes::{bayesian_signed_rank, SignedRankConfig};
use iaa_ensemble::eval::{accuracy, f_score};
use iaa_ensemble::fuzzy::{centroid, iaa_aggregate, membership, Interval};
use proptest::prelude::*;
use std::io::Write;

/// Intervals with endpoints on a 1/16 lattice inside [0, 4].
fn lattice_intervals(max_n: usize) -> impl Strategy<Value = Vec<Interval>> {
    prop::collection::vec((0i32..=64, 0i32..=64), 1..=max_n).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(a, b)| {
                let (lo, hi) = (a.min(b) as f64 / 16.0, a.max(b) as f64 / 16.0);
                Interval::new(lo, hi).unwrap()
            })
            .collect()
    })
}

/// Intervals with dyadic endpoints inside [0, 1].
fn unit_intervals(max_n: usize) -> impl Strategy<Value = Vec<Interval>> {
    prop::collection::vec((0i32..=64, 0i32..=64), 1..=max_n).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(a, b)| Interval::new(a.min(b) as f64 / 64.0, a.max(b) as f64 / 64.0).unwrap())
            .collect()
    })
}

fn brute_membership(intervals: &[Interval], x: f64) -> f64 {
    let hits = intervals
        .iter()
        .filter(|i| i.lo() <= x && x <= i.hi())
        .count();
    hits as f64 / intervals.len() as f64
}

fn region_height(intervals: &[Interval], x: f64) -> f64 {
    iaa_aggregate(intervals).unwrap().height_at(x)
}

proptest! {
    #[test]
    fn membership_matches_counting(ivs in lattice_intervals(10), k in 0i32..=80) {
        let x = -0.5 + k as f64 / 16.0;
        prop_assert_eq!(membership(&ivs, x).unwrap(), brute_membership(&ivs, x));
    }

    #[test]
    fn regions_agree_with_counting_off_endpoints(ivs in lattice_intervals(10)) {
        let fs = iaa_aggregate(&ivs).unwrap();
        // 9(2k+1)/4000 - 1/4 is never a multiple of 1/16
        for k in 0..1000 {
            let x = -0.25 + 9.0 * (2 * k + 1) as f64 / 4000.0;
            prop_assert_eq!(fs.height_at(x), brute_membership(&ivs, x), "x = {}", x);
        }
    }

    #[test]
    fn endpoint_heights_never_exceed_counting(ivs in lattice_intervals(10)) {
        let fs = iaa_aggregate(&ivs).unwrap();
        for iv in &ivs {
            for x in [iv.lo(), iv.hi()] {
                prop_assert!(fs.height_at(x) <= brute_membership(&ivs, x));
            }
            if iv.is_degenerate() {
                prop_assert_eq!(fs.height_at(iv.lo()), brute_membership(&ivs, iv.lo()));
            }
        }
    }

    #[test]
    fn regions_are_ordered_and_quantised(ivs in lattice_intervals(10)) {
        let fs = iaa_aggregate(&ivs).unwrap();
        let n = ivs.len();
        prop_assert_eq!(fs.n_sources(), n);
        for r in fs.regions() {
            prop_assert!(r.left <= r.right);
            prop_assert!(r.height > 0.0 && r.height <= 1.0);
            let k = r.height * n as f64;
            prop_assert_eq!(k, k.round());
            prop_assert_eq!(r.height, r.count as f64 / n as f64);
            if r.left == r.right {
                prop_assert!(ivs.iter().any(|i| i.is_degenerate() && i.lo() == r.left));
            }
        }
        for w in fs.regions().windows(2) {
            prop_assert!(w[0].left <= w[1].left);
            prop_assert!(w[0].right <= w[1].left);
        }
    }

    #[test]
    fn region_boundaries_are_input_endpoints(ivs in lattice_intervals(10)) {
        let fs = iaa_aggregate(&ivs).unwrap();
        let ends: Vec<f64> = ivs.iter().flat_map(|i| [i.lo(), i.hi()]).collect();
        for r in fs.regions() {
            prop_assert!(ends.contains(&r.left) && ends.contains(&r.right));
        }
    }

    #[test]
    fn order_of_inputs_is_irrelevant(ivs in lattice_intervals(10), seed in any::<u64>()) {
        let mut shuffled = ivs.clone();
        let mut rng = repeat_stream(seed, 0);
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        prop_assert_eq!(iaa_aggregate(&ivs).unwrap(), iaa_aggregate(&shuffled).unwrap());
    }

    #[test]
    fn translation_moves_everything_by_delta(ivs in lattice_intervals(10), d in -32i32..=32) {
        let delta = d as f64 / 16.0;
        let moved: Vec<Interval> = ivs
            .iter()
            .map(|i| Interval::new(i.lo() + delta, i.hi() + delta).unwrap())
            .collect();
        let a = iaa_aggregate(&ivs).unwrap();
        let b = iaa_aggregate(&moved).unwrap();
        prop_assert_eq!(a.regions().len(), b.regions().len());
        for (ra, rb) in a.regions().iter().zip(b.regions()) {
            prop_assert_eq!(ra.left + delta, rb.left);
            prop_assert_eq!(ra.right + delta, rb.right);
            prop_assert_eq!(ra.height, rb.height);
        }
        let (ca, cb) = (centroid(&a).unwrap(), centroid(&b).unwrap());
        prop_assert!((ca + delta - cb).abs() < 1e-12, "{} + {} vs {}", ca, delta, cb);
    }

    #[test]
    fn centroid_within_support(ivs in lattice_intervals(10)) {
        let fs = iaa_aggregate(&ivs).unwrap();
        let c = centroid(&fs).unwrap();
        let lo = fs.regions().iter().map(|r| r.left).fold(f64::INFINITY, f64::min);
        let hi = fs.regions().iter().map(|r| r.right).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= c && c <= hi);
    }

    #[test]
    fn identical_inputs_collapse(a in 0i32..64, w in 1i32..64, n in 1usize..=10) {
        let iv = Interval::new(a as f64 / 64.0, (a + w) as f64 / 64.0).unwrap();
        let fs = iaa_aggregate(&vec![iv; n]).unwrap();
        prop_assert_eq!(fs.regions().len(), 1);
        let r = fs.regions()[0];
        prop_assert_eq!((r.left, r.right, r.height), (iv.lo(), iv.hi(), 1.0));
        prop_assert_eq!(centroid(&fs).unwrap(), (iv.lo() + iv.hi()) / 2.0);
    }

    #[test]
    fn unclamped_shift_never_lowers_centroid(ivs in unit_intervals(10), d in 0i32..=16) {
        let delta = d as f64 / 64.0;
        let max_hi = ivs.iter().map(|i| i.hi()).fold(0.0, f64::max);
        prop_assume!(max_hi + delta <= 1.0);
        let moved: Vec<Interval> = ivs
            .iter()
            .map(|i| Interval::new(i.lo() + delta, i.hi() + delta).unwrap())
            .collect();
        let before = centroid(&iaa_aggregate(&ivs).unwrap()).unwrap();
        let after = centroid(&iaa_aggregate(&moved).unwrap()).unwrap();
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn quartile_intervals_stay_inside_row_range(
        rows in prop::collection::vec(prop::collection::vec(0u32..=100, 1..=25), 1..=6)
    ) {
        let width = rows[0].len();
        let rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| (0..width).map(|j| r[j % r.len()] as f64 / 100.0).collect())
            .collect();
        let tableau = ProbabilityTableau::from_rows(rows.clone()).unwrap();
        let intervals = uncertainty_intervals(&tableau).unwrap();
        prop_assert_eq!(intervals.len(), rows.len());
        for (iv, row) in intervals.iter().zip(&rows) {
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(0.0 <= iv.lo() && iv.lo() <= iv.hi() && iv.hi() <= 1.0);
            prop_assert!(min <= iv.lo() && iv.hi() <= max);
        }
    }

    #[test]
    fn scores_are_bounded(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..50)) {
        let pred: Vec<Label> = pairs.iter().map(|p| Label::from_is_main(p.0)).collect();
        let truth: Vec<Label> = pairs.iter().map(|p| Label::from_is_main(p.1)).collect();
        let acc = accuracy(&pred, &truth).unwrap();
        let f = f_score(&pred, &truth, Label::Main).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        prop_assert!((0.0..=1.0).contains(&f));
        let any_positive = truth.contains(&Label::Main);
        prop_assert_eq!(f == 1.0, pred == truth && any_positive);
    }

    #[test]
    fn posterior_samples_are_normalised(
        diffs in prop::collection::vec(-0.2f64..0.2, 1..12),
        seed in any::<u64>(),
    ) {
        let cfg = SignedRankConfig { mc_samples: 300, ..Default::default() };
        let post = bayesian_signed_rank(&diffs, &cfg, &mut repeat_stream(seed, 0)).unwrap();
        prop_assert_eq!(post.samples.len(), 300);
        for s in &post.samples {
            prop_assert!((s.theta_left + s.theta_rope + s.theta_right - 1.0).abs() < 1e-9);
            for t in [s.theta_left, s.theta_rope, s.theta_right] {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&t));
            }
        }
        prop_assert_eq!(post.p_left + post.p_rope + post.p_right, 1.0);
    }

    #[test]
    fn mirrored_differences_swap_sides(
        diffs in prop::collection::vec(-0.2f64..0.2, 1..12),
        seed in any::<u64>(),
    ) {
        let mc = 400;
        let cfg = SignedRankConfig { mc_samples: mc, ..Default::default() };
        let neg: Vec<f64> = diffs.iter().map(|d| -d).collect();
        let a = bayesian_signed_rank(&diffs, &cfg, &mut repeat_stream(seed, 0)).unwrap();
        let b = bayesian_signed_rank(&neg, &cfg, &mut repeat_stream(seed, 0)).unwrap();
        let tol = 2.0 / (mc as f64).sqrt();
        prop_assert!((a.p_left - b.p_right).abs() <= tol);
        prop_assert!((a.p_right - b.p_left).abs() <= tol);
        prop_assert!((a.p_rope - b.p_rope).abs() <= tol);
    }
}

fn write_csv(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::File::create(&path)
        .unwrap()
        .write_all(body.as_bytes())
        .unwrap();
    path
}

fn table(rows: &[(Option<i32>, Option<i32>, bool)]) -> String {
    let mut s = String::from("a,b,class\n");
    for (a, b, main) in rows {
        let cell = |v: &Option<i32>| v.map_or("?".to_string(), |v| v.to_string());
        s.push_str(&format!(
            "{},{},{}\n",
            cell(a),
            cell(b),
            if *main { "yes" } else { "no" }
        ));
    }
    s
}

fn cell_strategy() -> impl Strategy<Value = Option<i32>> {
    prop::option::weighted(0.8, -50i32..50)
}

fn row_strategy() -> impl Strategy<Value = (Option<i32>, Option<i32>, bool)> {
    (cell_strategy(), cell_strategy(), any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn imputation_ignores_test_split(
        mut train in prop::collection::vec(row_strategy(), 3..20),
        test in prop::collection::vec(row_strategy(), 2..10),
        replacement in cell_strategy(),
        which in any::<prop::sample::Index>(),
    ) {
        // both labels must be present somewhere
        train[0].2 = true;
        train[1].2 = false;
        train[0].0 = Some(1);
        train[0].1 = Some(1);
        let dir = tempfile::tempdir().unwrap();
        let tr = write_csv(dir.path(), "train.csv", &table(&train));
        let te = write_csv(dir.path(), "test.csv", &table(&test));
        let (train_a, _) = load_dataset(&tr, &te, "yes", "?").unwrap();

        let mut altered = test.clone();
        let i = which.index(altered.len());
        altered[i].0 = replacement;
        let te2 = write_csv(dir.path(), "test2.csv", &table(&altered));
        let (train_b, _) = load_dataset(&tr, &te2, "yes", "?").unwrap();
        prop_assert_eq!(train_a, train_b);
    }

    #[test]
    fn loading_twice_is_identical(
        mut train in prop::collection::vec(row_strategy(), 3..20),
        test in prop::collection::vec(row_strategy(), 2..10),
    ) {
        train[0].2 = true;
        train[1].2 = false;
        train[0].0 = Some(1);
        train[0].1 = Some(1);
        let dir = tempfile::tempdir().unwrap();
        let tr = write_csv(dir.path(), "train.csv", &table(&train));
        let te = write_csv(dir.path(), "test.csv", &table(&test));
        let first = load_dataset(&tr, &te, "yes", "?").unwrap();
        let second = load_dataset(&tr, &te, "yes", "?").unwrap();
        prop_assert_eq!(&first, &second);
        let (a, b) = first;
        for (ds, rows) in [(&a, &train), (&b, &test)] {
            prop_assert_eq!(ds.n_rows(), rows.len());
            for (i, r) in rows.iter().enumerate() {
                prop_assert_eq!(ds.label(i).is_main(), r.2);
                for (f, v) in [r.0, r.1].iter().enumerate() {
                    if let Some(v) = v {
                        prop_assert_eq!(ds.value(i, f), *v as f64);
                    }
                }
            }
        }
    }
}

#[test]
fn clamped_shift_can_lower_centroid() {
    // Clamping at 1 collapses the top region, so the height-weighted mean of
    // midpoints drops even though every endpoint moved right or stayed.
    let before = [
        Interval::new(0.0, 0.995).unwrap(),
        Interval::new(0.5, 1.0).unwrap(),
    ];
    let after = [
        Interval::new(0.01, 1.0).unwrap(),
        Interval::new(0.51, 1.0).unwrap(),
    ];
    let c0 = centroid(&iaa_aggregate(&before).unwrap()).unwrap();
    let c1 = centroid(&iaa_aggregate(&after).unwrap()).unwrap();
    assert!(c1 < c0, "{c1} vs {c0}");
}

#[test]
fn touching_endpoint_is_not_a_region() {
    let ivs = [
        Interval::new(0.0, 1.0).unwrap(),
        Interval::new(1.0, 2.0).unwrap(),
    ];
    assert_eq!(membership(&ivs, 1.0).unwrap(), 1.0);
    assert_eq!(region_height(&ivs, 1.0), 0.5);
}

#[test]
fn shared_types_are_thread_safe() {
    fn check<T: Send + Sync>() {}
    check::<Dataset>();
    check::<iaa_ensemble::fuzzy::Type1FuzzySet>();
}
