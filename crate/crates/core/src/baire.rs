//! Baire array display, the longest-common-prefix ultrametric, per-layer
//! cluster statistics and the bounded-prefix index.
//!
//! A [`DigitArray`] is an `I x J` table of base-`m` digits. Row `r` holds the
//! digit expansion of object `order[r]`; level `j` (0-based here, `j + 1` in
//! the usual 1-based numbering) carries weight `m^-(j+1)`. Each prefix of
//! length `c` names a Baire ball of radius `m^-c`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const MIN_BASE: u8 = 2;
pub const MAX_BASE: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitArray {
    base: u8,
    rows: usize,
    levels: usize,
    cells: Vec<u8>,
    order: Vec<usize>,
}

impl DigitArray {
    /// Builds an array from row-major cells with identity row order.
    pub fn new(base: u8, rows: usize, levels: usize, cells: Vec<u8>) -> Result<Self> {
        let order = (0..rows).collect();
        Self::with_order(base, rows, levels, cells, order)
    }

    pub fn with_order(
        base: u8,
        rows: usize,
        levels: usize,
        cells: Vec<u8>,
        order: Vec<usize>,
    ) -> Result<Self> {
        if !(MIN_BASE..=MAX_BASE).contains(&base) {
            return Err(Error::invalid_arg(format!("base {base} outside 2..=10")));
        }
        if levels == 0 {
            return Err(Error::invalid_arg("digit array needs at least one level"));
        }
        if cells.len() != rows * levels {
            return Err(Error::invalid_arg(format!(
                "{} cells for a {rows}x{levels} array",
                cells.len()
            )));
        }
        if let Some(pos) = cells.iter().position(|&d| d >= base) {
            return Err(Error::invalid_arg(format!(
                "cell {} (row {}, level {}) is {} >= base {base}",
                pos,
                pos / levels,
                pos % levels + 1,
                cells[pos]
            )));
        }
        check_permutation(&order, rows)?;
        Ok(Self {
            base,
            rows,
            levels,
            cells,
            order,
        })
    }

    /// Builds an array from explicit digit rows.
    pub fn from_rows(base: u8, rows: &[Vec<u8>]) -> Result<Self> {
        let levels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != levels) {
            return Err(Error::invalid_arg("ragged digit rows"));
        }
        let cells = rows.iter().flatten().copied().collect();
        Self::new(base, rows.len(), levels, cells)
    }

    /// Builds an array from per-level columns (`columns[j][i]`).
    pub fn from_levels(base: u8, columns: &[Vec<u8>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid_arg("ragged digit levels"));
        }
        let levels = columns.len();
        let mut cells = Vec::with_capacity(rows * levels);
        for i in 0..rows {
            cells.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(base, rows, levels, cells)
    }

    pub fn base(&self) -> u8 {
        self.base
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Object id held by each row.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.cells[r * self.levels..(r + 1) * self.levels]
    }

    pub fn get(&self, r: usize, level: usize) -> u8 {
        self.cells[r * self.levels + level]
    }

    pub fn level(&self, level: usize) -> impl Iterator<Item = u8> + '_ {
        (0..self.rows).map(move |r| self.get(r, level))
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks_exact(self.levels)
    }

    /// Same shape and order, new cells and base. Cells are re-validated.
    pub fn replace_cells(&self, base: u8, cells: Vec<u8>) -> Result<Self> {
        Self::with_order(base, self.rows, self.levels, cells, self.order.clone())
    }

    pub fn set_order(&mut self, order: Vec<usize>) -> Result<()> {
        check_permutation(&order, self.rows)?;
        self.order = order;
        Ok(())
    }

    /// Textual key of the first `depth` digits of row `r`.
    pub fn prefix_key(&self, r: usize, depth: usize) -> String {
        self.row(r)[..depth]
            .iter()
            .map(|&d| digit_char(d))
            .collect()
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::invalid_arg(format!(
            "order has {} entries for {n} rows",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &o in order {
        if o >= n || std::mem::replace(&mut seen[o], true) {
            return Err(Error::invalid_arg("order is not a permutation"));
        }
    }
    Ok(())
}

fn digit_char(d: u8) -> char {
    char::from(b'0' + d)
}

/// Length of the longest common prefix of two digit rows.
pub fn common_prefix_len(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Baire distance `base^-beta`, `beta` the longest common prefix length.
///
/// Identical rows are at distance `base^-J`, not zero: the rows are finite
/// truncations and agree on every available digit.
pub fn baire_distance(a: &[u8], b: &[u8], base: u8) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid_arg(format!(
            "rows of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if !(MIN_BASE..=MAX_BASE).contains(&base) {
        return Err(Error::invalid_arg(format!("base {base} outside 2..=10")));
    }
    if a.iter().chain(b).any(|&d| d >= base) {
        return Err(Error::invalid_arg(format!("digit not in base {base}")));
    }
    let beta = common_prefix_len(a, b);
    Ok(f64::from(base).powi(-(beta as i32)))
}

/// Objects grouped by their first `depth` digits.
///
/// Each bucket is a closed Baire ball of radius `base^-depth`. Lookups hash a
/// key of `depth` characters and return a borrowed slice, so the cost of a
/// query does not depend on the number of objects.
#[derive(Debug, Clone)]
pub struct PrefixIndex {
    base: u8,
    depth: usize,
    buckets: HashMap<String, Vec<usize>>,
}

impl PrefixIndex {
    pub fn build(array: &DigitArray, depth: usize) -> Result<Self> {
        if depth == 0 || depth > array.levels() {
            return Err(Error::invalid_arg(format!(
                "index depth {depth} outside 1..={}",
                array.levels()
            )));
        }
        let mut buckets: HashMap<String, Vec<usize>> = HashMap::new();
        for r in 0..array.rows() {
            buckets
                .entry(array.prefix_key(r, depth))
                .or_default()
                .push(array.order()[r]);
        }
        for ids in buckets.values_mut() {
            ids.sort_unstable();
        }
        Ok(Self {
            base: array.base(),
            depth,
            buckets,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn base(&self) -> u8 {
        self.base
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Object ids (ascending) whose first `depth` digits spell `prefix`.
    pub fn query(&self, prefix: &str) -> Result<&[usize]> {
        if prefix.len() != self.depth {
            return Err(Error::invalid_arg(format!(
                "prefix `{prefix}` has length {}, index depth is {}",
                prefix.len(),
                self.depth
            )));
        }
        if !prefix
            .bytes()
            .all(|b| b.is_ascii_digit() && b - b'0' < self.base)
        {
            return Err(Error::invalid_arg(format!(
                "prefix `{prefix}` is not a base-{} digit string",
                self.base
            )));
        }
        Ok(self.buckets.get(prefix).map_or(&[][..], Vec::as_slice))
    }

    /// Buckets in ascending key order.
    pub fn buckets(&self) -> Vec<(&str, &[usize])> {
        let mut out: Vec<_> = self
            .buckets
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
            .collect();
        out.sort_unstable_by(|a, b| a.0.cmp(b.0));
        out
    }

    pub fn largest_bucket(&self) -> usize {
        self.buckets.values().map(Vec::len).max().unwrap_or(0)
    }
}

/// Number of non-empty Baire clusters at each level `1..=J`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerStats {
    pub counts: Vec<usize>,
}

impl LayerStats {
    /// CSV with header `level,count`, levels numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,count\n");
        for (l, c) in self.counts.iter().enumerate() {
            let _ = writeln!(s, "{},{}", l + 1, c);
        }
        s
    }
}

/// Counts distinct length-`l` prefixes for every `l`.
///
/// Rows are sorted lexicographically once; a new length-`l` prefix starts
/// wherever two neighbours share fewer than `l` leading digits.
pub fn layer_cluster_counts(array: &DigitArray) -> LayerStats {
    let levels = array.levels();
    if array.rows() == 0 {
        return LayerStats {
            counts: vec![0; levels],
        };
    }
    let mut rows: Vec<&[u8]> = array.iter_rows().collect();
    rows.sort_unstable();
    // breaks[b] = number of adjacent pairs with common prefix exactly b
    let mut breaks = vec![0usize; levels + 1];
    for w in rows.windows(2) {
        breaks[common_prefix_len(w[0], w[1])] += 1;
    }
    let mut counts = Vec::with_capacity(levels);
    let mut acc = 1;
    for b in breaks.iter().take(levels) {
        acc += b;
        counts.push(acc);
    }
    LayerStats { counts }
}
