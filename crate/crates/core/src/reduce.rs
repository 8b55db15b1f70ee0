//! Stepwise base reduction of a Baire array.
//!
//! One step maps a base-`v` array onto base `v - 1` by merging two adjacent
//! digit values `w - 1` and `w`. The pair is picked from neighbouring rows
//! that share a parent digit and differ by exactly one at the next level: the
//! value pair realised by the fewest such neighbours is the one merged, since
//! it disturbs the hierarchy least. The decrement `k >= w -> k - 1` is then
//! applied to every cell of every level.
//!
//! Choice of `w`:
//! - counts are pooled over all levels, one `w` per step;
//! - equal minimal counts resolve to the smallest `w`;
//! - with no neighbour pair at distance one, the pair `(v, v + 1)` with the
//!   fewest occupied cells overall is merged (smallest `w` on ties).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::baire::DigitArray;
use crate::error::{Error, Result};

/// Count of qualifying neighbour pairs per value pair `(v, v + 1)`.
pub type CandidateCounts = BTreeMap<(u8, u8), usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub base_before: u8,
    pub base_after: u8,
    /// Larger value of the merged pair; cells `>= merge_value` were decremented.
    pub merge_value: u8,
    pub candidate_counts: CandidateCounts,
    pub fallback_used: bool,
}

/// Neighbour pairs `(i, i + 1)` with a common parent digit whose digits
/// differ by one, tallied per value pair over all levels.
pub fn candidate_pairs(array: &DigitArray) -> Result<CandidateCounts> {
    if array.rows() < 2 {
        return Err(Error::invalid_arg(format!(
            "need at least 2 objects, got {}",
            array.rows()
        )));
    }
    Ok(count_candidates(array))
}

fn count_candidates(array: &DigitArray) -> CandidateCounts {
    let mut counts = CandidateCounts::new();
    for i in 1..array.rows() {
        let (upper, lower) = (array.row(i - 1), array.row(i));
        for level in 0..array.levels() {
            // level 1 hangs off the common root
            if level > 0 && upper[level - 1] != lower[level - 1] {
                continue;
            }
            let (a, b) = (upper[level], lower[level]);
            if a.abs_diff(b) == 1 {
                *counts.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    counts
}

fn choose_merge(array: &DigitArray, counts: &CandidateCounts) -> (u8, bool) {
    // BTreeMap iterates in ascending pair order, so min_by_key keeps the
    // smallest w among equal counts
    if let Some((&(_, w), _)) = counts.iter().min_by_key(|(_, &n)| n) {
        return (w, false);
    }
    let mut occupancy = vec![0usize; usize::from(array.base())];
    array
        .cells()
        .iter()
        .for_each(|&d| occupancy[usize::from(d)] += 1);
    let w = (1..array.base())
        .min_by_key(|&w| occupancy[usize::from(w - 1)] + occupancy[usize::from(w)])
        .expect("base >= 2");
    (w, true)
}

/// Merges one adjacent value pair, producing a base `v - 1` array.
pub fn reduce_base_once(array: &DigitArray) -> Result<(DigitArray, ReductionStep)> {
    if array.base() <= 2 {
        return Err(Error::invalid_arg(format!(
            "cannot reduce below base 2 (array is base {})",
            array.base()
        )));
    }
    let counts = count_candidates(array);
    let (w, fallback_used) = choose_merge(array, &counts);
    let cells = array
        .cells()
        .iter()
        .map(|&k| if k >= w { k - 1 } else { k })
        .collect();
    let base_after = array.base() - 1;
    let reduced = array.replace_cells(base_after, cells)?;
    Ok((
        reduced,
        ReductionStep {
            base_before: array.base(),
            base_after,
            merge_value: w,
            candidate_counts: counts,
            fallback_used,
        },
    ))
}

/// Repeated reduction down to base `target`, one entry per produced base.
pub fn reduce_chain(array: &DigitArray, target: u8) -> Result<Vec<(DigitArray, ReductionStep)>> {
    if target < 2 || target >= array.base() {
        return Err(Error::invalid_arg(format!(
            "target base {target} must satisfy 2 <= target < {}",
            array.base()
        )));
    }
    let mut chain: Vec<(DigitArray, ReductionStep)> = Vec::new();
    while chain.last().map_or(array.base(), |(a, _)| a.base()) > target {
        let current = chain.last().map_or(array, |(a, _)| a);
        chain.push(reduce_base_once(current)?);
    }
    Ok(chain)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPoint {
    pub base: u8,
    pub err_vs_original: f64,
    pub err_vs_previous: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorTrace {
    pub points: Vec<ErrorPoint>,
}

impl ErrorTrace {
    /// CSV `base,err_vs_original,err_vs_previous` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("base,err_vs_original,err_vs_previous\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e}",
                p.base, p.err_vs_original, p.err_vs_previous
            );
        }
        s
    }
}

/// Mean over cells of the squared difference of the two arrays, each cell
/// normalized to [0, 1] by `value / (base - 1)`.
pub fn normalized_sq_error(a: &DigitArray, b: &DigitArray) -> Result<f64> {
    if a.rows() != b.rows() || a.levels() != b.levels() {
        return Err(Error::InvalidState(format!(
            "shape {}x{} vs {}x{}",
            a.rows(),
            a.levels(),
            b.rows(),
            b.levels()
        )));
    }
    let n = a.cells().len();
    if n == 0 {
        return Ok(0.0);
    }
    let sa = f64::from(a.base() - 1);
    let sb = f64::from(b.base() - 1);
    let sum: f64 = a
        .cells()
        .iter()
        .zip(b.cells())
        .map(|(&x, &y)| {
            let d = f64::from(x) / sa - f64::from(y) / sb;
            d * d
        })
        .sum();
    Ok(sum / n as f64)
}

/// Approximation error of each chain member against the original array and
/// against its predecessor in the chain.
pub fn approximation_errors(
    chain: &[(DigitArray, ReductionStep)],
    original: &DigitArray,
) -> Result<ErrorTrace> {
    let mut points = Vec::with_capacity(chain.len());
    let mut previous = original;
    for (array, _) in chain {
        points.push(ErrorPoint {
            base: array.base(),
            err_vs_original: normalized_sq_error(array, original)?,
            err_vs_previous: normalized_sq_error(array, previous)?,
        });
        previous = array;
    }
    Ok(ErrorTrace { points })
}

/// One CSV row per step: bases, merge value, fallback flag and candidate
/// counts as `v-v+1:N` entries separated by spaces.
pub fn steps_to_csv(steps: &[&ReductionStep]) -> String {
    let mut s = String::from("base_before,base_after,merge_value,fallback_used,candidates\n");
    for step in steps {
        let cands: Vec<String> = step
            .candidate_counts
            .iter()
            .map(|(&(a, b), n)| format!("{a}-{b}:{n}"))
            .collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            step.base_before,
            step.base_after,
            step.merge_value,
            step.fallback_used,
            cands.join(" ")
        );
    }
    s
}
