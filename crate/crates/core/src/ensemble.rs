//! Bagged leave-one-feature-out ensemble with two aggregation rules.
//!
//! For `m` features the ensemble holds `m` classifiers; classifier `i` never
//! sees feature `i`. Each of the `n` bootstrap rounds draws one resample of
//! the training set and fits all `m` trees on it, so a test sample yields an
//! `m x n` tableau of main-class probabilities.
//!
//! * IAA aggregation: each tableau row becomes the interquartile interval
//!   `[Q1, Q3]`, the `m` intervals are fused into a fuzzy set and its centroid
//!   is thresholded.
//! * Majority vote: every one of the `m x n` trees votes with its label.
//!
//! Both rules read the very same fitted trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cart::{DecisionTree, TreeParams};
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::fuzzy::{iaa_aggregate, Interval, Type1FuzzySet};

/// The random stream driving bootstrap draws.
pub type RngStream = ChaCha8Rng;

/// Per-classifier interquartile interval of bootstrap probabilities.
pub type UncertaintyInterval = Interval;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_bootstraps: usize,
    pub seed: u64,
    pub tree_params: TreeParams,
    /// Centroid cut-off for the main class.
    pub threshold: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_bootstraps: 20,
            seed: 0,
            tree_params: TreeParams::default(),
            threshold: 0.5,
        }
    }
}

impl EnsembleConfig {
    pub fn with_bootstraps(n_bootstraps: usize, seed: u64) -> Self {
        EnsembleConfig {
            n_bootstraps,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bootstraps == 0 {
            return Err(Error::domain("n_bootstraps must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::domain(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for one experiment repeat.
pub fn repeat_stream(master_seed: u64, repeat: u64) -> RngStream {
    let mixed = splitmix64(splitmix64(master_seed) ^ repeat.wrapping_mul(0xd1b5_4a32_d192_ed03));
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Draw `n_rows` row indices uniformly with replacement.
pub fn bootstrap_indices<R: Rng + ?Sized>(n_rows: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n_rows == 0 {
        return Err(Error::domain("cannot bootstrap an empty training set"));
    }
    Ok((0..n_rows).map(|_| rng.random_range(0..n_rows)).collect())
}

/// Resample `train` with replacement to its own size.
pub fn bootstrap_sample<R: Rng + ?Sized>(train: &Dataset, rng: &mut R) -> Result<Dataset> {
    let idx = bootstrap_indices(train.n_rows(), rng)?;
    Ok(train.select(&idx))
}

/// Probabilities `P[i][j]` of classifier `i` under bootstrap `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTableau {
    n_classifiers: usize,
    n_bootstraps: usize,
    values: Vec<f64>,
}

impl ProbabilityTableau {
    /// Build from classifier rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::domain("tableau needs at least one row and column"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("tableau rows differ in length"));
        }
        if rows.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::domain("tableau entries must lie in [0, 1]"));
        }
        Ok(ProbabilityTableau {
            n_classifiers: m,
            n_bootstraps: n,
            values: rows.concat(),
        })
    }

    pub fn n_classifiers(&self) -> usize {
        self.n_classifiers
    }

    pub fn n_bootstraps(&self) -> usize {
        self.n_bootstraps
    }

    pub fn get(&self, classifier: usize, bootstrap: usize) -> f64 {
        self.values[classifier * self.n_bootstraps + bootstrap]
    }

    pub fn row(&self, classifier: usize) -> &[f64] {
        &self.values[classifier * self.n_bootstraps..(classifier + 1) * self.n_bootstraps]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_bootstraps)
    }
}

/// Quantile of sorted data at fraction `f`, interpolating linearly between
/// the order statistics around position `(len - 1) * f`.
pub fn quantile_sorted(sorted: &[f64], f: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * f;
    let below = pos.floor() as usize;
    let above = (below + 1).min(sorted.len() - 1);
    let (lo, hi) = (sorted[below], sorted[above]);
    (lo + (pos - below as f64) * (hi - lo)).clamp(lo, hi)
}

/// `[Q1, Q3]` of each classifier's bootstrap probabilities.
pub fn uncertainty_intervals(tableau: &ProbabilityTableau) -> Result<Vec<UncertaintyInterval>> {
    tableau
        .rows()
        .map(|row| {
            let mut sorted = row.to_vec();
            sorted.sort_by(f64::total_cmp);
            Interval::new(
                quantile_sorted(&sorted, 0.25),
                quantile_sorted(&sorted, 0.75),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IaaDecision {
    pub label: Label,
    pub centroid: f64,
    pub fuzzy_set: Type1FuzzySet,
}

/// Aggregate intervals, defuzzify, and pick the main class iff the centroid
/// reaches `threshold`.
pub fn classify_iaa(intervals: &[UncertaintyInterval], threshold: f64) -> Result<IaaDecision> {
    let fuzzy_set = iaa_aggregate(intervals)?;
    let centroid = fuzzy_set.centroid()?;
    Ok(IaaDecision {
        label: Label::from_is_main(centroid >= threshold),
        centroid,
        fuzzy_set,
    })
}

/// Majority over tree labels; an exact tie goes to the main class.
pub fn majority_label(labels: impl IntoIterator<Item = Label>) -> Label {
    let (main, other) = labels.into_iter().fold((0usize, 0usize), |(m, o), l| {
        if l.is_main() {
            (m + 1, o)
        } else {
            (m, o + 1)
        }
    });
    Label::from_is_main(main >= other)
}

/// All `m x n` trees of one bagging run.
#[derive(Debug, Clone, PartialEq)]
pub struct BaggedEnsemble {
    /// `rounds[j][i]`: tree for classifier `i` fitted on bootstrap `j`.
    rounds: Vec<Vec<DecisionTree>>,
    bootstraps: Vec<Vec<usize>>,
    n_features: usize,
    threshold: f64,
}

impl BaggedEnsemble {
    /// Draw `config.n_bootstraps` resamples from `rng` (sequentially) and fit
    /// the leave-one-feature-out trees on each.
    pub fn train<R: Rng + ?Sized>(
        train: &Dataset,
        config: &EnsembleConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let m = train.n_features();
        if m < 2 {
            return Err(Error::domain(format!(
                "leave-one-feature-out needs at least 2 features, dataset has {m}"
            )));
        }
        let bootstraps = (0..config.n_bootstraps)
            .map(|_| bootstrap_indices(train.n_rows(), rng))
            .collect::<Result<Vec<_>>>()?;
        let masks: Vec<Vec<usize>> = (0..m)
            .map(|skip| (0..m).filter(|&f| f != skip).collect())
            .collect();

        let rounds = bootstraps
            .par_iter()
            .map(|rows| {
                masks
                    .iter()
                    .map(|mask| DecisionTree::train_on_rows(train, rows, mask, config.tree_params))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(BaggedEnsemble {
            rounds,
            bootstraps,
            n_features: m,
            threshold: config.threshold,
        })
    }

    pub fn n_classifiers(&self) -> usize {
        self.n_features
    }

    pub fn n_bootstraps(&self) -> usize {
        self.rounds.len()
    }

    /// Row indices of bootstrap `j`.
    pub fn bootstrap(&self, j: usize) -> &[usize] {
        &self.bootstraps[j]
    }

    pub fn tree(&self, classifier: usize, bootstrap: usize) -> &DecisionTree {
        &self.rounds[bootstrap][classifier]
    }

    pub fn tableau(&self, sample: &[f64]) -> Result<ProbabilityTableau> {
        let m = self.n_features;
        let n = self.rounds.len();
        let mut values = vec![0.0; m * n];
        for (j, round) in self.rounds.iter().enumerate() {
            for (i, tree) in round.iter().enumerate() {
                values[i * n + j] = tree.predict_proba(sample)?;
            }
        }
        Ok(ProbabilityTableau {
            n_classifiers: m,
            n_bootstraps: n,
            values,
        })
    }

    pub fn classify_iaa(&self, sample: &[f64]) -> Result<IaaDecision> {
        let intervals = uncertainty_intervals(&self.tableau(sample)?)?;
        classify_iaa(&intervals, self.threshold)
    }

    /// Counts of (main, other) votes over all trees.
    pub fn votes(&self, sample: &[f64]) -> Result<(usize, usize)> {
        let mut main = 0;
        let mut total = 0;
        for tree in self.rounds.iter().flatten() {
            main += usize::from(tree.predict_label(sample)?.is_main());
            total += 1;
        }
        Ok((main, total - main))
    }

    pub fn classify_majority_vote(&self, sample: &[f64]) -> Result<Label> {
        let (main, other) = self.votes(sample)?;
        Ok(Label::from_is_main(main >= other))
    }
}

/// Bootstrap probabilities of every leave-one-feature-out tree for one sample.
pub fn collect_probabilities<R: Rng + ?Sized>(
    train: &Dataset,
    test_sample: &[f64],
    config: &EnsembleConfig,
    rng: &mut R,
) -> Result<ProbabilityTableau> {
    BaggedEnsemble::train(train, config, rng)?.tableau(test_sample)
}

/// Majority vote of the same trees [`collect_probabilities`] would fit from
/// the same stream state.
pub fn classify_majority_vote<R: Rng + ?Sized>(
    train: &Dataset,
    test_sample: &[f64],
    config: &EnsembleConfig,
    rng: &mut R,
) -> Result<Label> {
    BaggedEnsemble::train(train, config, rng)?.classify_majority_vote(test_sample)
}
