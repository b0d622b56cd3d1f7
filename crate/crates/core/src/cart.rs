//! Binary CART classifier grown by greedy Gini-impurity minimisation.
//!
//! Leaves keep the raw class counts, so the tree yields both a main-class
//! probability (leaf frequency) and a hard label. Training is deterministic:
//! split candidates are compared with exact integer arithmetic and ties go to
//! the lowest feature index, then the lowest threshold.

use std::cmp::Ordering;

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Nodes with fewer samples become leaves.
    pub min_samples_split: usize,
    /// `None` grows until the other stopping rules fire.
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        main: usize,
        total: usize,
    },
    /// Samples with `x[feature] >= threshold` go right.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        if let Node::Split { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: Node,
    feature_mask: Vec<usize>,
    n_features: usize,
    params: TreeParams,
}

/// Candidate split score `A_l / n_l + A_r / n_r` (with `A = main^2 + other^2`)
/// kept as an exact fraction. Larger means lower weighted Gini impurity.
#[derive(Debug, Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn node(main: usize, total: usize) -> Score {
        let other = (total - main) as u128;
        let main = main as u128;
        Score {
            num: main * main + other * other,
            den: total as u128,
        }
    }

    fn split(left_main: usize, left_total: usize, main: usize, total: usize) -> Score {
        let l = Score::node(left_main, left_total);
        let r = Score::node(main - left_main, total - left_total);
        Score {
            num: l.num * r.den + r.num * l.den,
            den: l.den * r.den,
        }
    }

    fn cmp(&self, other: &Score) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: Score,
}

struct Builder<'a> {
    data: &'a Dataset,
    mask: &'a [usize],
    params: TreeParams,
}

impl Builder<'_> {
    fn grow(&self, rows: Vec<usize>, depth: usize) -> Node {
        let total = rows.len();
        let main = rows
            .iter()
            .filter(|&&r| self.data.label(r).is_main())
            .count();
        let leaf = Node::Leaf { main, total };
        if main == 0
            || main == total
            || total < self.params.min_samples_split
            || self.params.max_depth.is_some_and(|d| depth >= d)
        {
            return leaf;
        }
        let Some(best) = self.best_split(&rows, main) else {
            return leaf;
        };
        if best.score.cmp(&Score::node(main, total)) != Ordering::Greater {
            return leaf;
        }
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.data.value(r, best.feature) < best.threshold);
        Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(left_rows, depth + 1)),
            right: Box::new(self.grow(right_rows, depth + 1)),
        }
    }

    fn best_split(&self, rows: &[usize], main: usize) -> Option<BestSplit> {
        let total = rows.len();
        let mut best: Option<BestSplit> = None;
        let mut column: Vec<(f64, bool)> = Vec::with_capacity(total);
        for &feature in self.mask {
            column.clear();
            column.extend(
                rows.iter()
                    .map(|&r| (self.data.value(r, feature), self.data.label(r).is_main())),
            );
            column.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_main = 0;
            for i in 0..total - 1 {
                left_main += usize::from(column[i].1);
                let (lo, hi) = (column[i].0, column[i + 1].0);
                if lo == hi {
                    continue;
                }
                let score = Score::split(left_main, i + 1, main, total);
                if best
                    .as_ref()
                    .is_none_or(|b| score.cmp(&b.score) == Ordering::Greater)
                {
                    best = Some(BestSplit {
                        feature,
                        threshold: midpoint(lo, hi),
                        score,
                    });
                }
            }
        }
        best
    }
}

/// Midpoint of two distinct values, nudged so that `lo < t <= hi` holds
/// even when they are adjacent floats.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

impl DecisionTree {
    /// Fit on every row of `data` using only features in `feature_mask`.
    pub fn train(data: &Dataset, feature_mask: &[usize], params: TreeParams) -> Result<Self> {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        Self::train_on_rows(data, &rows, feature_mask, params)
    }

    /// Fit on a multiset of row indices of `data` (e.g. a bootstrap draw).
    pub fn train_on_rows(
        data: &Dataset,
        rows: &[usize],
        feature_mask: &[usize],
        params: TreeParams,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("cannot train a tree on zero samples"));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= data.n_rows()) {
            return Err(Error::domain(format!(
                "row index {r} out of range for {} rows",
                data.n_rows()
            )));
        }
        if feature_mask.is_empty() {
            return Err(Error::domain("feature mask is empty"));
        }
        if let Some(&f) = feature_mask.iter().find(|&&f| f >= data.n_features()) {
            return Err(Error::domain(format!(
                "feature index {f} out of range for {} features",
                data.n_features()
            )));
        }
        if params.min_samples_split == 0 {
            return Err(Error::domain("min_samples_split must be positive"));
        }
        let mut mask = feature_mask.to_vec();
        mask.sort_unstable();
        mask.dedup();

        let builder = Builder {
            data,
            mask: &mask,
            params,
        };
        let root = builder.grow(rows.to_vec(), 0);
        Ok(DecisionTree {
            root,
            feature_mask: mask,
            n_features: data.n_features(),
            params,
        })
    }

    fn leaf(&self, sample: &[f64]) -> Result<(usize, usize)> {
        if sample.len() != self.n_features {
            return Err(Error::domain(format!(
                "sample has {} features, tree was trained on {}",
                sample.len(),
                self.n_features
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { main, total } => return Ok((*main, *total)),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if sample[*feature] >= *threshold {
                        right
                    } else {
                        left
                    };
                }
            }
        }
    }

    /// Main-class frequency of the leaf `sample` falls into.
    pub fn predict_proba(&self, sample: &[f64]) -> Result<f64> {
        let (main, total) = self.leaf(sample)?;
        Ok(main as f64 / total as f64)
    }

    /// Main class iff the leaf frequency is at least 0.5.
    pub fn predict_label(&self, sample: &[f64]) -> Result<Label> {
        let (main, total) = self.leaf(sample)?;
        Ok(Label::from_is_main(2 * main >= total))
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn feature_mask(&self) -> &[usize] {
        &self.feature_mask
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn n_leaves(&self) -> usize {
        let mut n = 0;
        self.root.visit(&mut |node| {
            if matches!(node, Node::Leaf { .. }) {
                n += 1;
            }
        });
        n
    }

    /// Feature index of every internal node, in pre-order.
    pub fn split_features(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.root.visit(&mut |node| {
            if let Node::Split { feature, .. } = node {
                out.push(*feature);
            }
        });
        out
    }
}
