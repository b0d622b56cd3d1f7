//! C ABI over `iaa-ensemble`.
//!
//! Every fallible function returns an [`IaaStatus`]; on failure a message is
//! available from [`iaa_last_error_message`] on the same thread. Objects are
//! opaque handles released with their `*_free` function. Panics never cross
//! the boundary; they are reported as `IAA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use iaa_ensemble::data::{load_dataset, Dataset};
use iaa_ensemble::ensemble::{classify_iaa, repeat_stream, EnsembleConfig};
use iaa_ensemble::eval::bayes::{bayesian_signed_rank, SignedRankConfig};
use iaa_ensemble::eval::{run_experiment, ExperimentResult, Method, Metric};
use iaa_ensemble::fuzzy::{self, membership, Interval, Type1FuzzySet};
use iaa_ensemble::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IaaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    IoError = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IaaMethod {
    Iaa = 0,
    MajorityVote = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IaaMetric {
    Accuracy = 0,
    FScore = 1,
}

/// One piecewise-constant region of a fuzzy set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IaaRegion {
    pub left: f64,
    pub right: f64,
    pub height: f64,
}

/// Opaque aggregated fuzzy set.
pub struct IaaFuzzySet {
    inner: Type1FuzzySet,
}

/// Opaque loaded train/test pair.
pub struct IaaDatasetPair {
    train: Dataset,
    test: Dataset,
}

/// Opaque experiment result.
pub struct IaaExperiment {
    inner: ExperimentResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(IaaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } => IaaStatus::IoError,
            Error::Domain(_) => IaaStatus::InvalidArgument,
            _ => IaaStatus::DataError,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(IaaStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Failure {
    Failure(IaaStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> IaaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IaaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IaaStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn intervals(lo: *const f64, hi: *const f64, n: usize) -> Result<Vec<Interval>, Failure> {
    if n == 0 {
        return Err(invalid("need at least one interval"));
    }
    let lo = slice(lo, n, "lo")?;
    let hi = slice(hi, n, "hi")?;
    lo.iter()
        .zip(hi)
        .map(|(&l, &h)| Interval::new(l, h).map_err(Failure::from))
        .collect()
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn iaa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Fraction of the `n` intervals `[lo[i], hi[i]]` that contain `x`.
///
/// # Safety
/// `lo` and `hi` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_membership(
    lo: *const f64,
    hi: *const f64,
    n: usize,
    x: f64,
    out: *mut f64,
) -> IaaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = membership(&intervals(lo, hi, n)?, x)?;
        Ok(())
    })
}

/// Aggregate `n` intervals into a new fuzzy set written to `*out`.
///
/// # Safety
/// `lo` and `hi` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_aggregate(
    lo: *const f64,
    hi: *const f64,
    n: usize,
    out: *mut *mut IaaFuzzySet,
) -> IaaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = fuzzy::iaa_aggregate(&intervals(lo, hi, n)?)?;
        *out = Box::into_raw(Box::new(IaaFuzzySet { inner }));
        Ok(())
    })
}

/// Number of regions, or 0 for a null handle.
///
/// # Safety
/// `fs` must be null or a live handle from [`iaa_aggregate`].
#[no_mangle]
pub unsafe extern "C" fn iaa_fuzzy_set_len(fs: *const IaaFuzzySet) -> usize {
    fs.as_ref().map_or(0, |f| f.inner.regions().len())
}

/// # Safety
/// `fs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_fuzzy_set_region(
    fs: *const IaaFuzzySet,
    index: usize,
    out: *mut IaaRegion,
) -> IaaStatus {
    guard(|| {
        let fs = fs.as_ref().ok_or_else(|| null("fuzzy set"))?;
        let out = out_ptr(out, "out")?;
        let r = fs
            .inner
            .regions()
            .get(index)
            .ok_or_else(|| invalid(format!("region index {index} out of range")))?;
        *out = IaaRegion {
            left: r.left,
            right: r.right,
            height: r.height,
        };
        Ok(())
    })
}

/// # Safety
/// `fs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_fuzzy_set_centroid(
    fs: *const IaaFuzzySet,
    out: *mut f64,
) -> IaaStatus {
    guard(|| {
        let fs = fs.as_ref().ok_or_else(|| null("fuzzy set"))?;
        *out_ptr(out, "out")? = fs.inner.centroid()?;
        Ok(())
    })
}

/// # Safety
/// `fs` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iaa_fuzzy_set_free(fs: *mut IaaFuzzySet) {
    if !fs.is_null() {
        drop(Box::from_raw(fs));
    }
}

/// Aggregate, defuzzify and threshold. `*is_main` is 1 when the centroid is
/// at least `threshold`, else 0. `centroid` may be null.
///
/// # Safety
/// `lo` and `hi` must point to `n` readable doubles; `is_main` must be
/// writable; `centroid` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_classify_intervals(
    lo: *const f64,
    hi: *const f64,
    n: usize,
    threshold: f64,
    is_main: *mut c_int,
    centroid: *mut f64,
) -> IaaStatus {
    guard(|| {
        let is_main = out_ptr(is_main, "is_main")?;
        let decision = classify_iaa(&intervals(lo, hi, n)?, threshold)?;
        *is_main = c_int::from(decision.label.is_main());
        if let Some(c) = centroid.as_mut() {
            *c = decision.centroid;
        }
        Ok(())
    })
}

/// Load a train/test pair. `missing_token` may be null for the default `?`.
///
/// # Safety
/// String arguments must be null-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_dataset_load(
    train_path: *const c_char,
    test_path: *const c_char,
    main_class: *const c_char,
    missing_token: *const c_char,
    out: *mut *mut IaaDatasetPair,
) -> IaaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let train_path = str_arg(train_path, "train_path")?;
        let test_path = str_arg(test_path, "test_path")?;
        let main_class = str_arg(main_class, "main_class")?;
        let missing = if missing_token.is_null() {
            "?"
        } else {
            str_arg(missing_token, "missing_token")?
        };
        let (train, test) = load_dataset(
            Path::new(train_path),
            Path::new(test_path),
            main_class,
            missing,
        )?;
        *out = Box::into_raw(Box::new(IaaDatasetPair { train, test }));
        Ok(())
    })
}

/// Feature count, or 0 for a null handle.
///
/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iaa_dataset_n_features(pair: *const IaaDatasetPair) -> usize {
    pair.as_ref().map_or(0, |p| p.train.n_features())
}

/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iaa_dataset_n_train(pair: *const IaaDatasetPair) -> usize {
    pair.as_ref().map_or(0, |p| p.train.n_rows())
}

/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iaa_dataset_n_test(pair: *const IaaDatasetPair) -> usize {
    pair.as_ref().map_or(0, |p| p.test.n_rows())
}

/// # Safety
/// `pair` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iaa_dataset_free(pair: *mut IaaDatasetPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Run both methods for `repeats` repeats with default tree settings.
///
/// # Safety
/// `pair` must be a live handle; `name` null-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_experiment_run(
    pair: *const IaaDatasetPair,
    name: *const c_char,
    n_bootstraps: usize,
    repeats: usize,
    seed: u64,
    out: *mut *mut IaaExperiment,
) -> IaaStatus {
    guard(|| {
        let pair = pair.as_ref().ok_or_else(|| null("dataset"))?;
        let name = str_arg(name, "name")?;
        let out = out_ptr(out, "out")?;
        let config = EnsembleConfig::with_bootstraps(n_bootstraps, seed);
        let inner = run_experiment(name, &pair.train, &pair.test, &config, repeats)?;
        *out = Box::into_raw(Box::new(IaaExperiment { inner }));
        Ok(())
    })
}

/// Mean of `metric` over all repeats of `method`.
///
/// # Safety
/// `exp` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_experiment_mean(
    exp: *const IaaExperiment,
    method: IaaMethod,
    metric: IaaMetric,
    out: *mut f64,
) -> IaaStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("experiment"))?;
        let method = match method {
            IaaMethod::Iaa => Method::Iaa,
            IaaMethod::MajorityVote => Method::MajorityVote,
        };
        let metric = match metric {
            IaaMetric::Accuracy => Metric::Accuracy,
            IaaMetric::FScore => Metric::FScore,
        };
        *out_ptr(out, "out")? = exp.inner.mean(method, metric);
        Ok(())
    })
}

/// Write the results file to `path`.
///
/// # Safety
/// `exp` must be a live handle; `path` null-terminated.
#[no_mangle]
pub unsafe extern "C" fn iaa_experiment_write(
    exp: *const IaaExperiment,
    path: *const c_char,
) -> IaaStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("experiment"))?;
        exp.inner.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `exp` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iaa_experiment_free(exp: *mut IaaExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Bayesian signed-rank comparison of `q` paired differences. Any of the
/// three output pointers may be null.
///
/// # Safety
/// `differences` must point to `q` readable doubles; non-null outputs must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn iaa_signed_rank(
    differences: *const f64,
    q: usize,
    rope: f64,
    prior_weight: f64,
    prior_pseudo: f64,
    mc_samples: usize,
    seed: u64,
    p_left: *mut f64,
    p_rope: *mut f64,
    p_right: *mut f64,
) -> IaaStatus {
    guard(|| {
        let diffs = slice(differences, q, "differences")?;
        let config = SignedRankConfig {
            rope,
            prior_weight,
            prior_pseudo,
            mc_samples,
        };
        let post = bayesian_signed_rank(diffs, &config, &mut repeat_stream(seed, 0))?;
        for (p, v) in [
            (p_left, post.p_left),
            (p_rope, post.p_rope),
            (p_right, post.p_right),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}
