//! Benchmark datasets: delimited-text loading, median imputation, binary
//! label mapping and the dataset manifest.
//!
//! Files are comma separated with the class label in the last column. A
//! first row containing a non-numeric feature cell is treated as a header.
//! Cells equal to the missing-value token are replaced with the median of
//! that feature over the *training* split; the same medians are applied to
//! the test split.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

/// Binary class label relative to the dataset's designated main class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Main,
    Other,
}

impl Label {
    pub fn from_is_main(is_main: bool) -> Self {
        if is_main {
            Label::Main
        } else {
            Label::Other
        }
    }

    pub fn is_main(self) -> bool {
        self == Label::Main
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Main => f.write_str("main"),
            Label::Other => f.write_str("other"),
        }
    }
}

/// Row-major feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<Label>,
    feature_names: Vec<String>,
    main_class: String,
    other_class: String,
}

impl Dataset {
    /// Build a dataset from rows. Class names are only descriptive.
    pub fn from_rows(
        rows: &[Vec<f64>],
        labels: Vec<Label>,
        feature_names: Vec<String>,
        main_class: impl Into<String>,
        other_class: impl Into<String>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("dataset must contain at least one row"));
        }
        if rows.len() != labels.len() {
            return Err(Error::domain(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let n_features = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != n_features) {
            return Err(Error::domain(format!(
                "row {i} has {} features, expected {n_features}",
                rows[i].len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("feature values must be finite"));
        }
        let feature_names = if feature_names.is_empty() {
            (0..n_features).map(|i| format!("x{i}")).collect()
        } else if feature_names.len() == n_features {
            feature_names
        } else {
            return Err(Error::domain(format!(
                "{} feature names for {n_features} features",
                feature_names.len()
            )));
        };
        Ok(Dataset {
            features: rows.concat(),
            n_features,
            labels,
            feature_names,
            main_class: main_class.into(),
            other_class: other_class.into(),
        })
    }

    /// Convenience constructor with generic names.
    pub fn from_xy(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        Dataset::from_rows(rows, labels, Vec::new(), "main", "other")
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.n_features)
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features + feature]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn main_class(&self) -> &str {
        &self.main_class
    }

    pub fn other_class(&self) -> &str {
        &self.other_class
    }

    /// New dataset made of the given rows (repetition allowed).
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Dataset {
            features,
            n_features: self.n_features,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            feature_names: self.feature_names.clone(),
            main_class: self.main_class.clone(),
            other_class: self.other_class.clone(),
        }
    }
}

/// Parsed file before label mapping and imputation.
struct RawTable {
    path: PathBuf,
    header: Option<Vec<String>>,
    /// `None` marks a missing cell.
    cells: Vec<Vec<Option<f64>>>,
    labels: Vec<String>,
}

fn read_table(path: &Path, missing_token: &str) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::load(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::load(path, "file contains no rows"));
    }

    let width = records[0].1.len();
    if width < 2 {
        return Err(Error::load(
            path,
            "need at least one feature column and a label column",
        ));
    }

    let is_header = records[0]
        .1
        .iter()
        .take(width - 1)
        .any(|c| c != missing_token && c.parse::<f64>().is_err());
    let header = if is_header {
        let (_, rec) = records.remove(0);
        Some(rec.iter().map(str::to_owned).collect())
    } else {
        None
    };
    if records.is_empty() {
        return Err(Error::load(path, "file contains a header but no data rows"));
    }

    let mut cells = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(Error::Cell {
                path: path.to_owned(),
                row: *line,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} columns, found {}", rec.len()),
            });
        }
        let mut row = Vec::with_capacity(width - 1);
        for (c, cell) in rec.iter().take(width - 1).enumerate() {
            if cell == missing_token {
                row.push(None);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(Some(v)),
                _ => {
                    return Err(Error::Cell {
                        path: path.to_owned(),
                        row: *line,
                        column: c + 1,
                        message: format!("cannot parse {cell:?} as a number"),
                    })
                }
            }
        }
        let label = rec.get(width - 1).unwrap_or_default();
        if label.is_empty() || label == missing_token {
            return Err(Error::Cell {
                path: path.to_owned(),
                row: *line,
                column: width,
                message: "missing class label".into(),
            });
        }
        cells.push(row);
        labels.push(label.to_owned());
    }

    Ok(RawTable {
        path: path.to_owned(),
        header,
        cells,
        labels,
    })
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// Per-feature medians of the observed cells.
fn column_medians(table: &RawTable) -> Result<Vec<f64>> {
    let width = table.cells[0].len();
    (0..width)
        .map(|c| {
            let mut observed: Vec<f64> = table.cells.iter().filter_map(|r| r[c]).collect();
            median(&mut observed).ok_or_else(|| {
                Error::load(
                    &table.path,
                    format!(
                        "feature column {} has no observed values to impute from",
                        c + 1
                    ),
                )
            })
        })
        .collect()
}

fn into_dataset(
    table: RawTable,
    medians: &[f64],
    main_class: &str,
    other_class: &str,
    names: Vec<String>,
) -> Result<Dataset> {
    let rows: Vec<Vec<f64>> = table
        .cells
        .iter()
        .map(|r| {
            r.iter()
                .zip(medians)
                .map(|(v, m)| v.unwrap_or(*m))
                .collect()
        })
        .collect();
    let labels = table
        .labels
        .iter()
        .map(|l| Label::from_is_main(l == main_class))
        .collect();
    Dataset::from_rows(&rows, labels, names, main_class, other_class)
}

/// Load a fixed train/test split.
///
/// Labels equal to `main_class_value` map to [`Label::Main`], the single
/// other label value to [`Label::Other`].
pub fn load_dataset(
    train_path: impl AsRef<Path>,
    test_path: impl AsRef<Path>,
    main_class_value: &str,
    missing_token: &str,
) -> Result<(Dataset, Dataset)> {
    let train_path = train_path.as_ref();
    let test_path = test_path.as_ref();
    let train = read_table(train_path, missing_token)?;
    let test = read_table(test_path, missing_token)?;

    let n_features = train.cells[0].len();
    if test.cells[0].len() != n_features {
        return Err(Error::load(
            test_path,
            format!(
                "test split has {} features but training split has {n_features}",
                test.cells[0].len()
            ),
        ));
    }

    let mut classes: Vec<&str> = train
        .labels
        .iter()
        .chain(test.labels.iter())
        .map(String::as_str)
        .collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() != 2 {
        return Err(Error::load(
            train_path,
            format!(
                "expected exactly two class labels across train and test, found {}: {:?}",
                classes.len(),
                classes
            ),
        ));
    }
    if !classes.contains(&main_class_value) {
        return Err(Error::load(
            train_path,
            format!("main class {main_class_value:?} is not one of the labels {classes:?}"),
        ));
    }
    let other_class = classes
        .iter()
        .find(|c| **c != main_class_value)
        .map(|c| c.to_string())
        .unwrap_or_default();

    let names = train
        .header
        .as_ref()
        .map(|h| h[..n_features].to_vec())
        .unwrap_or_default();
    let medians = column_medians(&train)?;
    let train_ds = into_dataset(
        train,
        &medians,
        main_class_value,
        &other_class,
        names.clone(),
    )?;
    let test_ds = into_dataset(test, &medians, main_class_value, &other_class, names)?;
    Ok((train_ds, test_ds))
}

/// One dataset section of the manifest.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub train_path: PathBuf,
    pub test_path: PathBuf,
    pub main_class: String,
    #[serde(default = "default_missing_token")]
    pub missing_token: String,
    /// Human readable name used in summaries.
    pub title: Option<String>,
    pub expected_features: Option<usize>,
    pub expected_train_rows: Option<usize>,
    pub expected_test_rows: Option<usize>,
}

fn default_missing_token() -> String {
    "?".to_owned()
}

impl ManifestEntry {
    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        load_dataset(
            &self.train_path,
            &self.test_path,
            &self.main_class,
            &self.missing_token,
        )
    }
}

/// Dataset manifest: a TOML file with one table per dataset.
///
/// ```toml
/// [wisconsin]
/// title = "Wisconsin Breast Cancer"
/// train_path = "wisconsin/train.csv"
/// test_path = "wisconsin/test.csv"
/// main_class = "malignant"
/// missing_token = "?"
/// expected_features = 9
/// expected_train_rows = 499
/// expected_test_rows = 200
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    path: PathBuf,
    entries: BTreeMap<String, ManifestEntry>,
}

impl DatasetManifest {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, path, base)
    }

    /// Parse manifest text; `base` anchors relative dataset paths.
    pub fn parse(text: &str, path: impl AsRef<Path>, base: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_owned();
        let mut entries: BTreeMap<String, ManifestEntry> =
            toml::from_str(text).map_err(|e| Error::Manifest {
                path: path.clone(),
                message: e.to_string(),
            })?;
        for entry in entries.values_mut() {
            entry.train_path = base.as_ref().join(&entry.train_path);
            entry.test_path = base.as_ref().join(&entry.test_path);
        }
        Ok(DatasetManifest { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, name: &str) -> Result<&ManifestEntry> {
        self.entries.get(name).ok_or_else(|| Error::Manifest {
            path: self.path.clone(),
            message: format!(
                "no dataset named {name:?} (known: {})",
                self.entries.keys().cloned().collect::<Vec<_>>().join(", ")
            ),
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &ManifestEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub field: &'static str,
    pub expected: usize,
    pub actual: usize,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {}, loaded {}",
            self.field, self.expected, self.actual
        )
    }
}

/// Differences between loaded shapes and manifest expectations; empty means
/// the data matches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub mismatches: Vec<Mismatch>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn validate_against_manifest(
    train: &Dataset,
    test: &Dataset,
    entry: &ManifestEntry,
) -> ValidationReport {
    let checks = [
        ("features", entry.expected_features, train.n_features()),
        ("train_rows", entry.expected_train_rows, train.n_rows()),
        ("test_rows", entry.expected_test_rows, test.n_rows()),
    ];
    let mismatches = checks
        .into_iter()
        .filter_map(|(field, expected, actual)| {
            expected.filter(|&e| e != actual).map(|expected| Mismatch {
                field,
                expected,
                actual,
            })
        })
        .collect();
    ValidationReport { mismatches }
}
