//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cart::TreeParams;
use crate::data::{load_dataset, validate_against_manifest, Dataset, DatasetManifest};
use crate::ensemble::{repeat_stream, EnsembleConfig};
use crate::error::Error;
use crate::eval::{
    self, bayesian_signed_rank, format_summary_table, read_summary_rows, result_file_name,
    run_experiment, write_posterior_samples, write_summary, Method, Metric, SignedRankConfig,
    SummaryRow,
};
use crate::fuzzy::{iaa_aggregate, Interval};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "iaa-ensemble",
    version,
    about = "Bagged decision-tree ensembles aggregated with the Interval Agreement Approach"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run repeated experiments on one dataset and write a results file.
    Run(RunArgs),
    /// Run every manifest dataset for each bootstrap count.
    Bench(BenchArgs),
    /// Bayesian signed-rank comparison of IAA against majority vote.
    Compare(CompareArgs),
    /// Aggregate intervals from a file and print the fuzzy set and centroid.
    Iaa(IaaArgs),
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    /// Minimum node size eligible for splitting.
    #[arg(long, default_value_t = 2)]
    pub min_samples_split: usize,
    /// Maximum tree depth (unlimited when omitted).
    #[arg(long)]
    pub max_depth: Option<usize>,
}

impl TreeArgs {
    fn params(&self) -> TreeParams {
        TreeParams {
            min_samples_split: self.min_samples_split,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset manifest (used with --dataset).
    #[arg(long, default_value = "data/manifest.toml")]
    pub manifest: PathBuf,
    /// Dataset name from the manifest.
    #[arg(long, conflicts_with_all = ["train", "test"])]
    pub dataset: Option<String>,
    /// Training split file (instead of --dataset).
    #[arg(long, requires_all = ["test", "main_class"])]
    pub train: Option<PathBuf>,
    /// Test split file.
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    /// Label value of the main class (with --train/--test).
    #[arg(long)]
    pub main_class: Option<String>,
    /// Missing-value token (with --train/--test).
    #[arg(long, default_value = "?")]
    pub missing_token: String,
    /// Name recorded in the results file (defaults to the dataset name or "custom").
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub n_bootstraps: usize,
    #[arg(long, default_value_t = 30)]
    pub repeats: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Results file (defaults to <name>_n<N>.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tree: TreeArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "data/manifest.toml")]
    pub manifest: PathBuf,
    /// Comma-separated bootstrap counts.
    #[arg(long, value_delimiter = ',', default_value = "20,50,100")]
    pub n_bootstraps: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub repeats: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory for result files and summary.csv.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[command(flatten)]
    pub tree: TreeArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Accuracy,
    Fscore,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Accuracy => Metric::Accuracy,
            MetricArg::Fscore => Metric::FScore,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Result files and/or summary files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "accuracy")]
    pub metric: MetricArg,
    /// Region of practical equivalence half-width.
    #[arg(long, default_value_t = 0.01)]
    pub rope: f64,
    #[arg(long, default_value_t = 50_000)]
    pub mc_samples: usize,
    /// Dirichlet weight of the prior pseudo-observation.
    #[arg(long, default_value_t = 0.5)]
    pub prior_weight: f64,
    /// Value of the prior pseudo-observation.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub prior_pseudo: f64,
    /// Only use rows with this bootstrap count.
    #[arg(long)]
    pub n_bootstraps: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Posterior sample dump.
    #[arg(long, default_value = "posterior_samples.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IaaArgs {
    /// File with one `lo,hi` interval per line.
    pub intervals: PathBuf,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    fn data(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_data_error() {
            EXIT_DATA
        } else {
            EXIT_RUNTIME
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Run(args) => cmd_run(&args, out),
        Command::Bench(args) => cmd_bench(&args, out, err),
        Command::Compare(args) => cmd_compare(&args, out),
        Command::Iaa(args) => cmd_iaa(&args, out),
    }
}

fn ensemble_config(n_bootstraps: usize, seed: u64, tree: &TreeArgs) -> CliResult<EnsembleConfig> {
    if n_bootstraps == 0 {
        return Err(CliError::usage("--n-bootstraps must be at least 1"));
    }
    if tree.min_samples_split == 0 {
        return Err(CliError::usage("--min-samples-split must be at least 1"));
    }
    Ok(EnsembleConfig {
        n_bootstraps,
        seed,
        tree_params: tree.params(),
        threshold: 0.5,
    })
}

/// Load one manifest entry and check it against the expected shape.
fn load_entry(manifest: &DatasetManifest, name: &str) -> CliResult<(Dataset, Dataset)> {
    let entry = manifest.get(name)?;
    let (train, test) = entry.load()?;
    let report = validate_against_manifest(&train, &test, entry);
    if !report.passed() {
        let details: Vec<String> = report.mismatches.iter().map(ToString::to_string).collect();
        return Err(CliError::data(format!(
            "dataset {name:?} does not match manifest {}: {}",
            manifest.path().display(),
            details.join("; ")
        )));
    }
    Ok((train, test))
}

fn print_run_summary(out: &mut dyn Write, result: &eval::ExperimentResult) -> std::io::Result<()> {
    writeln!(
        out,
        "{} (n={}, repeats={}, seed={})",
        result.dataset, result.n_bootstraps, result.repeats, result.seed
    )?;
    writeln!(out, "{:<14} {:>10} {:>10}", "method", "accuracy", "f_score")?;
    for method in Method::ALL {
        writeln!(
            out,
            "{:<14} {:>10.4} {:>10.4}",
            method.as_str(),
            result.mean(method, Metric::Accuracy),
            result.mean(method, Metric::FScore)
        )?;
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> CliResult {
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    let config = ensemble_config(args.n_bootstraps, args.seed, &args.tree)?;
    let (name, train, test) = match (&args.dataset, &args.train, &args.test) {
        (Some(name), None, None) => {
            let manifest = DatasetManifest::from_path(&args.manifest)?;
            let (train, test) = load_entry(&manifest, name)?;
            (name.clone(), train, test)
        }
        (None, Some(train), Some(test)) => {
            let main = args
                .main_class
                .as_deref()
                .ok_or_else(|| CliError::usage("--main-class is required with --train/--test"))?;
            let (tr, te) = load_dataset(train, test, main, &args.missing_token)?;
            (args.name.clone().unwrap_or_else(|| "custom".into()), tr, te)
        }
        _ => {
            return Err(CliError::usage(
                "specify either --dataset or both --train and --test",
            ))
        }
    };
    let name = args.name.clone().unwrap_or(name);

    let result = run_experiment(&name, &train, &test, &config, args.repeats)?;
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| result_file_name(&name, args.n_bootstraps));
    result.save(&path)?;
    print_run_summary(out, &result)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    if args.n_bootstraps.is_empty() {
        return Err(CliError::usage("--n-bootstraps needs at least one value"));
    }
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    for &n in &args.n_bootstraps {
        ensemble_config(n, args.seed, &args.tree)?;
    }
    let manifest = DatasetManifest::from_path(&args.manifest)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;

    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut failure: Option<i32> = None;
    for (name, _) in manifest.entries() {
        let (train, test) = match load_entry(&manifest, name) {
            Ok(split) => split,
            Err(e) => {
                writeln!(err, "skipping {name}: {}", e.message)?;
                failure = Some(failure.unwrap_or(0).max(e.code));
                continue;
            }
        };
        for &n in &args.n_bootstraps {
            let config = ensemble_config(n, args.seed, &args.tree)?;
            let outcome = run_experiment(name, &train, &test, &config, args.repeats)
                .and_then(|r| r.save(args.out.join(result_file_name(name, n))).map(|_| r));
            match outcome {
                Ok(result) => {
                    let row = result.summary();
                    writeln!(
                        out,
                        "{name} n={n}: accuracy iaa {:.3} / mv {:.3}, f-score iaa {:.3} / mv {:.3}",
                        row.accuracy_iaa,
                        row.accuracy_majority_vote,
                        row.f_score_iaa,
                        row.f_score_majority_vote
                    )?;
                    rows.push(row);
                }
                Err(e) => {
                    let e = CliError::from(e);
                    writeln!(err, "{name} n={n} failed: {}", e.message)?;
                    failure = Some(failure.unwrap_or(0).max(e.code));
                }
            }
        }
    }

    let mut buf = Vec::new();
    write_summary(&rows, &mut buf)?;
    eval::write_atomic(&args.out.join("summary.csv"), &buf)?;
    write!(out, "\n{}", format_summary_table(&rows))?;
    match failure {
        Some(code) => Err(CliError {
            code,
            message: "one or more datasets failed".into(),
        }),
        None => Ok(()),
    }
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> CliResult {
    if args.mc_samples == 0 {
        return Err(CliError::usage("--mc-samples must be at least 1"));
    }
    if args.rope.is_nan() || args.rope < 0.0 {
        return Err(CliError::usage("--rope must be non-negative"));
    }
    let mut rows = Vec::new();
    for path in &args.inputs {
        rows.extend(read_summary_rows(path)?);
    }
    if let Some(n) = args.n_bootstraps {
        rows.retain(|r| r.n_bootstraps == n);
    }
    if rows.is_empty() {
        return Err(CliError::data("no dataset results with both methods found"));
    }
    let counts: BTreeSet<usize> = rows.iter().map(|r| r.n_bootstraps).collect();
    if counts.len() > 1 {
        return Err(CliError::usage(format!(
            "inputs mix bootstrap counts {counts:?}; select one with --n-bootstraps"
        )));
    }
    let mut seen = BTreeSet::new();
    for r in &rows {
        if !seen.insert(r.dataset.as_str()) {
            return Err(CliError::data(format!(
                "dataset {:?} appears more than once",
                r.dataset
            )));
        }
    }

    let metric: Metric = args.metric.into();
    let differences: Vec<f64> = rows.iter().map(|r| r.difference(metric)).collect();
    let config = SignedRankConfig {
        rope: args.rope,
        prior_weight: args.prior_weight,
        prior_pseudo: args.prior_pseudo,
        mc_samples: args.mc_samples,
    };
    let posterior = bayesian_signed_rank(&differences, &config, &mut repeat_stream(args.seed, 0))?;

    let mut buf = Vec::new();
    write_posterior_samples(&posterior.samples, &mut buf)?;
    eval::write_atomic(&args.out, &buf)?;

    writeln!(out, "{:<12} {:>10}", "dataset", "iaa - mv")?;
    for (r, d) in rows.iter().zip(&differences) {
        writeln!(out, "{:<12} {:>10.4}", r.dataset, d)?;
    }
    writeln!(
        out,
        "p_left  (majority vote better) = {:.4}",
        posterior.p_left
    )?;
    writeln!(
        out,
        "p_rope  (practically equivalent) = {:.4}",
        posterior.p_rope
    )?;
    writeln!(out, "p_right (iaa better) = {:.4}", posterior.p_right)?;
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

/// Parse `lo,hi` lines; blank lines and `#` comments are skipped.
pub fn read_intervals(path: &Path) -> CliResult<Vec<Interval>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut intervals = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| CliError::data(format!("{}: line {}: {why}", path.display(), i + 1));
        let (lo, hi) = line
            .split_once(',')
            .ok_or_else(|| bad("expected `lo,hi`"))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| bad("left endpoint is not a number"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| bad("right endpoint is not a number"))?;
        intervals.push(Interval::new(lo, hi).map_err(|e| bad(&e.to_string()))?);
    }
    if intervals.is_empty() {
        return Err(CliError::data(format!("{}: no intervals", path.display())));
    }
    Ok(intervals)
}

pub fn cmd_iaa(args: &IaaArgs, out: &mut dyn Write) -> CliResult {
    let intervals = read_intervals(&args.intervals)?;
    let fs = iaa_aggregate(&intervals)?;
    let centroid = fs.centroid()?;
    write!(out, "{}", fs.to_records())?;
    writeln!(out, "# centroid {centroid}")?;
    Ok(())
}
