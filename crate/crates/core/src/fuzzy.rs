//! Intervals, piecewise-constant Type-1 fuzzy sets and the Interval Agreement
//! Approach (IAA).
//!
//! IAA turns `n` closed intervals into a fuzzy set whose membership at `x` is
//! the fraction of intervals that contain `x`. Because every interval is an
//! indicator function, that membership is constant between consecutive
//! interval endpoints, so the set is stored as a list of [`Region`]s
//! `(left, right, height)` with heights `k / n`.
//!
//! ```
//! use iaa_ensemble::fuzzy::{iaa_aggregate, Interval};
//!
//! let intervals = [
//!     Interval::new(1.0, 4.0).unwrap(),
//!     Interval::new(2.0, 5.0).unwrap(),
//!     Interval::new(3.0, 6.0).unwrap(),
//! ];
//! let fs = iaa_aggregate(&intervals).unwrap();
//! assert_eq!(fs.regions().len(), 5);
//! assert_eq!(fs.centroid().unwrap(), 3.5);
//! ```

use std::fmt;

use crate::error::{Error, Result};

/// A closed real interval `[lo, hi]` with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!(
                "interval endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo > hi {
            return Err(Error::domain(format!(
                "interval left endpoint exceeds right endpoint: [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[p, p]`.
    pub fn point(p: f64) -> Result<Self> {
        Interval::new(p, p)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// One constant piece of a fuzzy set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub left: f64,
    pub right: f64,
    pub height: f64,
    /// Number of source intervals covering the region; `height == count / n`.
    pub count: usize,
}

impl Region {
    pub fn is_point(&self) -> bool {
        self.left == self.right
    }
}

/// Piecewise-constant Type-1 fuzzy set produced by [`iaa_aggregate`].
///
/// Regions are ordered by `left`, never overlap in their interiors and all
/// have strictly positive height. Gaps with zero membership are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Type1FuzzySet {
    regions: Vec<Region>,
    n_sources: usize,
}

impl Type1FuzzySet {
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Number of intervals the set was aggregated from.
    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    /// Largest height among regions whose closed span contains `x`, or 0.
    ///
    /// Away from region boundaries this is the membership of `x`.
    pub fn height_at(&self, x: f64) -> f64 {
        self.regions
            .iter()
            .filter(|r| r.left <= x && x <= r.right)
            .map(|r| r.height)
            .fold(0.0, f64::max)
    }

    /// Height-weighted mean of the region endpoints:
    ///
    /// `sum_i (h_i * l_i + h_i * r_i) / sum_i 2 * h_i`
    ///
    /// Region width does not enter the weight.
    pub fn centroid(&self) -> Result<f64> {
        centroid(self)
    }

    /// Flat record listing, one `left,right,height` line per region.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for r in &self.regions {
            out.push_str(&format!("{},{},{}\n", r.left, r.right, r.height));
        }
        out
    }
}

/// Fraction of `intervals` that contain `x`.
pub fn membership(intervals: &[Interval], x: f64) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::domain("membership requires at least one interval"));
    }
    let hits = intervals.iter().filter(|iv| iv.contains(x)).count();
    Ok(hits as f64 / intervals.len() as f64)
}

/// Aggregate intervals into a Type-1 fuzzy set with the Interval Agreement
/// Approach.
///
/// Region boundaries are the sorted unique endpoints. Each open segment
/// between consecutive endpoints gets the number of intervals spanning it; a
/// degenerate input `[p, p]` additionally yields a point region at `p` whose
/// height is the membership at `p`. Zero-height segments are dropped.
pub fn iaa_aggregate(intervals: &[Interval]) -> Result<Type1FuzzySet> {
    if intervals.is_empty() {
        return Err(Error::domain("IAA requires at least one interval"));
    }
    let n = intervals.len();

    let mut los: Vec<f64> = intervals.iter().map(Interval::lo).collect();
    let mut his: Vec<f64> = intervals.iter().map(Interval::hi).collect();
    los.sort_by(f64::total_cmp);
    his.sort_by(f64::total_cmp);

    let mut breakpoints: Vec<f64> = los.iter().chain(his.iter()).copied().collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let mut points: Vec<f64> = intervals
        .iter()
        .filter(|iv| iv.is_degenerate())
        .map(Interval::lo)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let started_by = |x: f64| los.partition_point(|&lo| lo <= x);
    let ended_by = |x: f64| his.partition_point(|&hi| hi <= x);
    let ended_before = |x: f64| his.partition_point(|&hi| hi < x);

    let region = |left: f64, right: f64, count: usize| Region {
        left,
        right,
        height: count as f64 / n as f64,
        count,
    };

    let mut regions = Vec::with_capacity(breakpoints.len() + points.len());
    let mut next_point = points.iter().peekable();
    for (i, &a) in breakpoints.iter().enumerate() {
        if next_point.peek().is_some_and(|&&p| p == a) {
            next_point.next();
            regions.push(region(a, a, started_by(a) - ended_before(a)));
        }
        if let Some(&b) = breakpoints.get(i + 1) {
            // No endpoint lies strictly inside (a, b), so an interval covers
            // the segment iff it starts at or before a and ends after a.
            let count = started_by(a) - ended_by(a);
            if count > 0 {
                regions.push(region(a, b, count));
            }
        }
    }

    Ok(Type1FuzzySet {
        regions,
        n_sources: n,
    })
}

/// Defuzzify a fuzzy set; see [`Type1FuzzySet::centroid`].
pub fn centroid(fs: &Type1FuzzySet) -> Result<f64> {
    if fs.regions.is_empty() {
        return Err(Error::domain("centroid of a fuzzy set with no regions"));
    }
    let (num, den) = fs.regions.iter().fold((0.0, 0.0), |(num, den), r| {
        (
            num + r.height * r.left + r.height * r.right,
            den + 2.0 * r.height,
        )
    });
    let lo = fs.regions[0].left;
    let hi = fs.regions.iter().map(|r| r.right).fold(f64::MIN, f64::max);
    Ok((num / den).clamp(lo, hi))
}
