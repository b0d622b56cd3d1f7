//! Experiment driver, metrics and result files.

pub mod bayes;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::{Dataset, Label};
use crate::ensemble::{repeat_stream, BaggedEnsemble, EnsembleConfig};
use crate::error::{Error, Result};

pub use bayes::{bayesian_signed_rank, PosteriorSample, SignedRankConfig, SignedRankPosterior};

pub const RESULTS_SCHEMA: &str = "# iaa-ensemble results v1";
pub const SUMMARY_SCHEMA: &str = "# iaa-ensemble summary v1";
pub const POSTERIOR_SCHEMA: &str = "# iaa-ensemble posterior samples v1";

/// Aggregation rule applied to the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Iaa,
    MajorityVote,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Iaa, Method::MajorityVote];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Iaa => "iaa",
            Method::MajorityVote => "majority_vote",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iaa" => Ok(Method::Iaa),
            "majority_vote" => Ok(Method::MajorityVote),
            other => Err(Error::domain(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    FScore,
}

fn check_lengths(predictions: &[Label], truth: &[Label]) -> Result<()> {
    if predictions.len() != truth.len() {
        return Err(Error::domain(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::domain("metrics need at least one prediction"));
    }
    Ok(())
}

pub fn accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    check_lengths(predictions, truth)?;
    let hits = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// F1 of the `positive` class. Returns 0 when precision and recall are both
/// zero, including when the class appears in neither vector.
pub fn f_score(predictions: &[Label], truth: &[Label], positive: Label) -> Result<f64> {
    check_lengths(predictions, truth)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in predictions.iter().zip(truth) {
        match (p == positive, t == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    // 2PR / (P + R) == 2TP / (2TP + FP + FN)
    Ok(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub method: Method,
    pub accuracy: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub dataset: String,
    pub n_bootstraps: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Ordered by repeat, then method.
    pub records: Vec<RepeatRecord>,
}

impl ExperimentResult {
    pub fn records_for(&self, method: Method) -> impl Iterator<Item = &RepeatRecord> + '_ {
        self.records.iter().filter(move |r| r.method == method)
    }

    pub fn mean(&self, method: Method, metric: Metric) -> f64 {
        let values: Vec<f64> = self
            .records_for(method)
            .map(|r| match metric {
                Metric::Accuracy => r.accuracy,
                Metric::FScore => r.f_score,
            })
            .collect();
        values.iter().sum::<f64>() / values.len() as f64
    }

    pub fn summary(&self) -> SummaryRow {
        SummaryRow {
            dataset: self.dataset.clone(),
            n_bootstraps: self.n_bootstraps,
            repeats: self.repeats,
            accuracy_iaa: self.mean(Method::Iaa, Metric::Accuracy),
            accuracy_majority_vote: self.mean(Method::MajorityVote, Metric::Accuracy),
            f_score_iaa: self.mean(Method::Iaa, Metric::FScore),
            f_score_majority_vote: self.mean(Method::MajorityVote, Metric::FScore),
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{RESULTS_SCHEMA}")?;
        writeln!(
            out,
            "dataset,method,repeat,n_bootstraps,seed,accuracy,f_score"
        )?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.dataset,
                r.method,
                r.repeat,
                self.n_bootstraps,
                self.seed,
                r.accuracy,
                r.f_score
            )?;
        }
        Ok(())
    }

    /// Write the results file; nothing is left at `path` on failure.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        write_atomic(path.as_ref(), &buf)
    }
}

/// Write via a sibling temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::load(path, "output path has no file name"))?;
    let mut tmp_name = file_name.to_owned();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Run `repeats` independent bagging runs over the test split.
///
/// Repeat `r` draws from [`repeat_stream`]`(config.seed, r)`; both methods
/// score the same fitted trees. Repeats run in parallel, which does not
/// change the output.
pub fn run_experiment(
    dataset: &str,
    train: &Dataset,
    test: &Dataset,
    config: &EnsembleConfig,
    repeats: usize,
) -> Result<ExperimentResult> {
    if repeats == 0 {
        return Err(Error::domain("repeats must be at least 1"));
    }
    if train.n_features() != test.n_features() {
        return Err(Error::domain(format!(
            "train has {} features, test has {}",
            train.n_features(),
            test.n_features()
        )));
    }
    config.validate()?;

    let per_repeat = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let mut rng = repeat_stream(config.seed, r as u64);
            let ensemble = BaggedEnsemble::train(train, config, &mut rng)?;
            let mut iaa = Vec::with_capacity(test.n_rows());
            let mut vote = Vec::with_capacity(test.n_rows());
            for sample in test.rows() {
                iaa.push(ensemble.classify_iaa(sample)?.label);
                vote.push(ensemble.classify_majority_vote(sample)?);
            }
            let truth = test.labels();
            let record = |method, pred: &[Label]| -> Result<RepeatRecord> {
                Ok(RepeatRecord {
                    repeat: r,
                    method,
                    accuracy: accuracy(pred, truth)?,
                    f_score: f_score(pred, truth, Label::Main)?,
                })
            };
            Ok([
                record(Method::Iaa, &iaa)?,
                record(Method::MajorityVote, &vote)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentResult {
        dataset: dataset.to_owned(),
        n_bootstraps: config.n_bootstraps,
        repeats,
        seed: config.seed,
        records: per_repeat.into_iter().flatten().collect(),
    })
}

/// Mean metrics of both methods for one (dataset, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub n_bootstraps: usize,
    pub repeats: usize,
    pub accuracy_iaa: f64,
    pub accuracy_majority_vote: f64,
    pub f_score_iaa: f64,
    pub f_score_majority_vote: f64,
}

impl SummaryRow {
    /// IAA minus majority vote.
    pub fn difference(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Accuracy => self.accuracy_iaa - self.accuracy_majority_vote,
            Metric::FScore => self.f_score_iaa - self.f_score_majority_vote,
        }
    }
}

const SUMMARY_HEADER: &str = "dataset,n_bootstraps,repeats,accuracy_iaa,accuracy_majority_vote,f_score_iaa,f_score_majority_vote";

pub fn write_summary<W: Write>(rows: &[SummaryRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_SCHEMA}")?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.dataset,
            r.n_bootstraps,
            r.repeats,
            r.accuracy_iaa,
            r.accuracy_majority_vote,
            r.f_score_iaa,
            r.f_score_majority_vote
        )?;
    }
    Ok(())
}

/// Human-readable table of mean accuracy and F-score for both methods:
/// one row per dataset and bootstrap count.
pub fn format_summary_table(rows: &[SummaryRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.dataset.len())
        .max()
        .unwrap_or(7)
        .max(7);
    let mut s = format!(
        "{:<width$}  {:>5}  {:>8}  {:>8}  {:>8}  {:>8}\n",
        "dataset", "n", "acc IAA", "acc MV", "F IAA", "F MV"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<width$}  {:>5}  {:>8.3}  {:>8.3}  {:>8.3}  {:>8.3}\n",
            r.dataset,
            r.n_bootstraps,
            r.accuracy_iaa,
            r.accuracy_majority_vote,
            r.f_score_iaa,
            r.f_score_majority_vote
        ));
    }
    s
}

fn parse_field<T: FromStr>(path: &Path, line: usize, column: usize, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Cell {
        path: path.to_owned(),
        row: line,
        column,
        message: format!("cannot parse {raw:?}"),
    })
}

/// Read a results file or a summary file into per-(dataset, n) mean rows.
///
/// Result records are averaged per method; a dataset missing either method is
/// an error.
pub fn read_summary_rows(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let schema = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::load(path, "empty file")),
    };
    let is_summary = match schema.trim() {
        RESULTS_SCHEMA => false,
        SUMMARY_SCHEMA => true,
        other => {
            return Err(Error::load(
                path,
                format!("unrecognised schema line {other:?}"),
            ))
        }
    };

    let mut rows = Vec::new();
    // (dataset, n) -> method -> (repeats, acc sum, f sum)
    type Sums = BTreeMap<Method, (usize, f64, f64)>;
    let mut groups: BTreeMap<(String, usize), Sums> = BTreeMap::new();
    let mut saw_header = false;
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let want = 7;
        if cells.len() != want {
            return Err(Error::Cell {
                path: path.to_owned(),
                row: lineno,
                column: cells.len().min(want) + 1,
                message: format!("expected {want} fields, found {}", cells.len()),
            });
        }
        if is_summary {
            rows.push(SummaryRow {
                dataset: cells[0].to_owned(),
                n_bootstraps: parse_field(path, lineno, 2, cells[1])?,
                repeats: parse_field(path, lineno, 3, cells[2])?,
                accuracy_iaa: parse_field(path, lineno, 4, cells[3])?,
                accuracy_majority_vote: parse_field(path, lineno, 5, cells[4])?,
                f_score_iaa: parse_field(path, lineno, 6, cells[5])?,
                f_score_majority_vote: parse_field(path, lineno, 7, cells[6])?,
            });
        } else {
            let method: Method = cells[1].parse().map_err(|_| Error::Cell {
                path: path.to_owned(),
                row: lineno,
                column: 2,
                message: format!("unknown method {:?}", cells[1]),
            })?;
            let n: usize = parse_field(path, lineno, 4, cells[3])?;
            let acc: f64 = parse_field(path, lineno, 6, cells[5])?;
            let f: f64 = parse_field(path, lineno, 7, cells[6])?;
            let slot = groups
                .entry((cells[0].to_owned(), n))
                .or_default()
                .entry(method)
                .or_insert((0, 0.0, 0.0));
            slot.0 += 1;
            slot.1 += acc;
            slot.2 += f;
        }
    }

    for ((dataset, n), methods) in groups {
        let get = |m: Method| {
            methods.get(&m).copied().ok_or_else(|| {
                Error::load(
                    path,
                    format!("dataset {dataset:?} (n={n}) has no {m} records"),
                )
            })
        };
        let (ri, ai, fi) = get(Method::Iaa)?;
        let (rv, av, fv) = get(Method::MajorityVote)?;
        rows.push(SummaryRow {
            dataset: dataset.clone(),
            n_bootstraps: n,
            repeats: ri.max(rv),
            accuracy_iaa: ai / ri as f64,
            accuracy_majority_vote: av / rv as f64,
            f_score_iaa: fi / ri as f64,
            f_score_majority_vote: fv / rv as f64,
        });
    }
    Ok(rows)
}

/// One `theta_left,theta_rope,theta_right` line per posterior sample.
pub fn write_posterior_samples<W: Write>(
    samples: &[PosteriorSample],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{POSTERIOR_SCHEMA}")?;
    writeln!(out, "theta_left,theta_rope,theta_right")?;
    for s in samples {
        writeln!(out, "{},{},{}", s.theta_left, s.theta_rope, s.theta_right)?;
    }
    Ok(())
}

/// File name used for one (dataset, n) result in benchmark sweeps.
pub fn result_file_name(dataset: &str, n_bootstraps: usize) -> PathBuf {
    PathBuf::from(format!("{dataset}_n{n_bootstraps}.csv"))
}
