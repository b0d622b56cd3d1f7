//! Ensemble binary classification with interval-based aggregation.
//!
//! Leave-one-feature-out CART trees are bagged; each tree's bootstrap
//! probabilities for the main class are summarised as an interquartile
//! interval, the intervals are fused into a Type-1 fuzzy set with the
//! Interval Agreement Approach, and the set's centroid decides the label.
//! A majority vote over the same trees serves as the baseline, and a
//! Bayesian signed-rank test compares the two across datasets.
//!
//! Modules:
//! * [`fuzzy`]: intervals, IAA aggregation, centroid.
//! * [`cart`]: the base decision tree.
//! * [`ensemble`]: bagging, uncertainty intervals, both aggregation rules.
//! * [`data`]: dataset loading and the manifest.
//! * [`eval`]: metrics, repeated experiments, the signed-rank test.
//! * [`cli`]: the `iaa-ensemble` command.

pub mod cart;
pub mod cli;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod fuzzy;

pub use cart::{DecisionTree, TreeParams};
pub use data::{load_dataset, Dataset, DatasetManifest, Label};
pub use ensemble::{BaggedEnsemble, EnsembleConfig, ProbabilityTableau};
pub use error::{Error, Result};
pub use eval::{run_experiment, ExperimentResult, Method, Metric};
pub use fuzzy::{centroid, iaa_aggregate, membership, Interval, Region, Type1FuzzySet};
