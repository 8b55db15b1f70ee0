//! Data loading, seeded random axes and the consensus projection.

use std::fs;
use std::path::Path;

use crate::baire::DigitArray;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Default ensemble size.
pub const DEFAULT_AXES: usize = 99;
/// Default digit precision.
pub const DEFAULT_DIGITS: usize = 8;
/// Inflation applied to the range so the maximum maps strictly below 1.
pub const RESCALE_DELTA: f64 = 1e-9;
/// Largest digit count extractable exactly (10^19 still fits the 64-bit path).
pub const MAX_DIGITS: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// Comma-separated values, one object per line.
    DenseCsv,
    /// `row col value` per line, 0-based indices, with the declared dimension.
    SparseTriplet { dims: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    /// (row, col, value); duplicate cells add up.
    Sparse(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    dims: usize,
    storage: Storage,
}

impl DataMatrix {
    pub fn dense(rows: usize, dims: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || dims == 0 {
            return Err(Error::invalid_arg(
                "matrix needs at least one row and column",
            ));
        }
        if values.len() != rows * dims {
            return Err(Error::invalid_arg(format!(
                "{} values for a {rows}x{dims} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_arg("non-finite matrix value"));
        }
        Ok(Self {
            rows,
            dims,
            storage: Storage::Dense(values),
        })
    }

    pub fn sparse(rows: usize, dims: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if rows == 0 || dims == 0 {
            return Err(Error::invalid_arg(
                "matrix needs at least one row and column",
            ));
        }
        for &(r, c, v) in &triplets {
            if r >= rows || c >= dims {
                return Err(Error::invalid_arg(format!(
                    "triplet ({r}, {c}) outside {rows}x{dims}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid_arg("non-finite matrix value"));
            }
        }
        Ok(Self {
            rows,
            dims,
            storage: Storage::Sparse(triplets),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Cell value; sparse duplicates are summed.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v[row * self.dims + col],
            Storage::Sparse(t) => t
                .iter()
                .filter(|&&(r, c, _)| r == row && c == col)
                .map(|&(_, _, v)| v)
                .sum(),
        }
    }

    /// `x_i . u` for every row.
    pub fn project(&self, axis: &[f64]) -> Vec<f64> {
        debug_assert_eq!(axis.len(), self.dims);
        match &self.storage {
            Storage::Dense(v) => v
                .chunks_exact(self.dims)
                .map(|row| row.iter().zip(axis).map(|(x, u)| x * u).sum())
                .collect(),
            Storage::Sparse(t) => {
                let mut out = vec![0.0; self.rows];
                for &(r, c, v) in t {
                    out[r] += v * axis[c];
                }
                out
            }
        }
    }
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DataMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix(&text, format)
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<DataMatrix> {
    match format {
        MatrixFormat::DenseCsv => parse_dense(text),
        MatrixFormat::SparseTriplet { dims } => parse_triplets(text, dims),
    }
}

fn parse_number(cell: &str, line: usize) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("non-numeric cell `{}`", cell.trim())))?;
    if !v.is_finite() {
        return Err(Error::parse(
            line,
            format!("non-finite value `{}`", cell.trim()),
        ));
    }
    Ok(v)
}

fn parse_dense(text: &str) -> Result<DataMatrix> {
    let mut values = Vec::new();
    let mut dims = 0;
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let start = values.len();
        for cell in line.split(',') {
            values.push(parse_number(cell, line_no)?);
        }
        let width = values.len() - start;
        if rows == 0 {
            dims = width;
        } else if width != dims {
            return Err(Error::parse(
                line_no,
                format!("row has {width} columns, expected {dims}"),
            ));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::parse(1, "no rows"));
    }
    DataMatrix::dense(rows, dims, values)
}

fn parse_triplets(text: &str, dims: usize) -> Result<DataMatrix> {
    if dims == 0 {
        return Err(Error::invalid_arg("declared dimension must be >= 1"));
    }
    let mut triplets = Vec::new();
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected `row col value`, got {} fields", fields.len()),
            ));
        }
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad index `{s}`")))
        };
        let r = index(fields[0])?;
        let c = index(fields[1])?;
        if c >= dims {
            return Err(Error::parse(
                line_no,
                format!("column {c} out of range for dimension {dims}"),
            ));
        }
        let v = parse_number(fields[2], line_no)?;
        rows = rows.max(r + 1);
        triplets.push((r, c, v));
    }
    if triplets.is_empty() {
        return Err(Error::parse(1, "no rows"));
    }
    DataMatrix::sparse(rows, dims, triplets)
}

/// `R` unit-norm axes in `D` dimensions, components uniform on [0, 1) before
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionEnsemble {
    dims: usize,
    seed: u64,
    axes: Vec<f64>,
}

impl ProjectionEnsemble {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.axes.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k * self.dims..(k + 1) * self.dims]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.axes.chunks_exact(self.dims)
    }

    /// Component-wise mean of the axes.
    pub fn mean_axis(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dims];
        for axis in self.iter() {
            for (acc, u) in m.iter_mut().zip(axis) {
                *acc += u;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}

pub fn generate_axes(dims: usize, count: usize, seed: u64) -> Result<ProjectionEnsemble> {
    if dims == 0 || count == 0 {
        return Err(Error::invalid_arg(format!(
            "need D >= 1 and R >= 1, got D={dims}, R={count}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut axes = Vec::with_capacity(dims * count);
    for _ in 0..count {
        loop {
            let axis: Vec<f64> = (0..dims).map(|_| rng.uniform()).collect();
            let norm = axis.iter().map(|u| u * u).sum::<f64>().sqrt();
            // an all-zero draw has no direction; draw again
            if norm > 0.0 {
                axes.extend(axis.iter().map(|u| u / norm));
                break;
            }
        }
    }
    Ok(ProjectionEnsemble { dims, seed, axes })
}

/// Per-object consensus values rescaled into [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusVector {
    pub values: Vec<f64>,
    /// Object ids by ascending value, ties by id.
    pub sort_order: Vec<usize>,
    pub seed: u64,
    pub axes: usize,
}

impl ConsensusVector {
    /// Wraps precomputed values, deriving the sort order.
    pub fn from_values(values: Vec<f64>, seed: u64, axes: usize) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::InvalidState(format!(
                "consensus value {v} outside [0, 1)"
            )));
        }
        let sort_order = sort_order(&values);
        Ok(Self {
            values,
            sort_order,
            seed,
            axes,
        })
    }

    /// Values in sorted (row) order.
    pub fn sorted_values(&self) -> Vec<f64> {
        self.sort_order.iter().map(|&i| self.values[i]).collect()
    }
}

fn sort_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: equal values keep ascending id
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Mean projection over the ensemble, then affine rescale into [0, 1).
///
/// The mean of `x . u` over axes equals `x` dotted with the mean axis, which
/// is what is computed.
pub fn consensus_projection(
    x: &DataMatrix,
    ensemble: &ProjectionEnsemble,
) -> Result<ConsensusVector> {
    if x.dims() != ensemble.dims() {
        return Err(Error::invalid_arg(format!(
            "matrix has {} columns, axes have {}",
            x.dims(),
            ensemble.dims()
        )));
    }
    let raw = x.project(&ensemble.mean_axis());
    let values = rescale_unit(&raw);
    ConsensusVector::from_values(values, ensemble.seed(), ensemble.len())
}

/// `(v - min) / ((max - min)(1 + delta))`; all zeros when the range is empty.
pub fn rescale_unit(raw: &[f64]) -> Vec<f64> {
    let (min, max) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = max - min;
    if range <= 0.0 || range.is_nan() {
        return vec![0.0; raw.len()];
    }
    let scale = range * (1.0 + RESCALE_DELTA);
    raw.iter().map(|&v| (v - min) / scale).collect()
}

/// First `digits` decimal digits of `v` in [0, 1), as the integer
/// `floor(v * 10^digits)`.
///
/// Computed exactly from the binary representation: `v = m * 2^-s`, so the
/// result is `(m * 10^digits) >> s` in 128-bit arithmetic.
pub fn leading_decimal(v: f64, digits: usize) -> u64 {
    debug_assert!((0.0..1.0).contains(&v) && digits <= MAX_DIGITS);
    if v == 0.0 {
        return 0;
    }
    let bits = v.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    let shift = (-exp) as u32;
    if shift >= 128 {
        return 0;
    }
    let scaled = u128::from(mantissa) * 10u128.pow(digits as u32);
    (scaled >> shift) as u64
}

/// Decimal digit array of the consensus values, rows in sort order.
pub fn extract_digits(v: &ConsensusVector, digits: usize) -> Result<DigitArray> {
    if digits == 0 || digits > MAX_DIGITS {
        return Err(Error::invalid_arg(format!(
            "digit count {digits} outside 1..={MAX_DIGITS}"
        )));
    }
    let mut cells = Vec::with_capacity(v.values.len() * digits);
    for &id in &v.sort_order {
        let x = v.values[id];
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidState(format!(
                "value {x} of object {id} outside [0, 1)"
            )));
        }
        cells.extend(decimal_digits(leading_decimal(x, digits), digits));
    }
    DigitArray::with_order(10, v.values.len(), digits, cells, v.sort_order.clone())
}

fn decimal_digits(mut n: u64, digits: usize) -> Vec<u8> {
    let mut out = vec![0u8; digits];
    for slot in out.iter_mut().rev() {
        *slot = (n % 10) as u8;
        n /= 10;
    }
    out
}
