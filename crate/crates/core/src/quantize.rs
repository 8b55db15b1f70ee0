//! Per-level quantization of a decimal digit array into a base-K array.
//!
//! Every digit level is clustered on its own: the `I` digits of a level are
//! reduced to at most ten weighted distinct values, Lloyd iterations are run
//! from several random starts, and the best partition becomes the level's
//! codebook. Encoded digit `k` at a level stands for the `k`-th smallest
//! centroid of that level, so the encoded array keeps the digit order of the
//! original and can be displayed as a Baire hierarchy again.
//!
//! [`exact_quantize_1d`] solves the same one-dimensional problem globally by
//! dynamic programming over contiguous partitions and serves as the oracle
//! for the iterative solver.

use crate::baire::DigitArray;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub const DEFAULT_RESTARTS: usize = 50;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Base of the arrays accepted by [`encode_array`].
pub const SOURCE_BASE: u8 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
        }
    }
}

/// Distinct values in ascending order with their multiplicities.
#[derive(Debug, Clone, PartialEq)]
struct Weighted {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl Weighted {
    fn from_multiset(values: &[f64]) -> Result<(Self, Vec<usize>)> {
        if values.is_empty() {
            return Err(Error::invalid_arg("no values to quantize"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_arg("non-finite value"));
        }
        let mut sorted: Vec<usize> = (0..values.len()).collect();
        sorted.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut distinct = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut slot = vec![0; values.len()];
        for i in sorted {
            if distinct.last() != Some(&values[i]) {
                distinct.push(values[i]);
                weights.push(0.0);
            }
            *weights.last_mut().unwrap() += 1.0;
            slot[i] = distinct.len() - 1;
        }
        Ok((
            Self {
                values: distinct,
                weights,
            },
            slot,
        ))
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Outcome of a one-dimensional quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantized1d {
    /// Strictly ascending.
    pub centroids: Vec<f64>,
    /// Centroid index for each input value, in input order.
    pub assignment: Vec<usize>,
    /// Mean squared distance of the values to their centroids.
    pub mse: f64,
    /// Number of centroids actually used.
    pub effective_k: usize,
    /// Set when `K` exceeded the number of distinct values.
    pub k_reduced: bool,
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid_arg("K must be >= 1"));
    }
    Ok(())
}

/// Multi-start Lloyd iteration; the lowest-MSE run wins (earliest on ties).
pub fn kmeans_1d(values: &[f64], k: usize, params: KMeansParams) -> Result<Quantized1d> {
    check_k(k)?;
    let (points, slot) = Weighted::from_multiset(values)?;
    let effective_k = k.min(points.len());
    let (centroids, labels, mse) = kmeans_weighted(&points, effective_k, params)?;
    Ok(Quantized1d {
        centroids,
        assignment: slot.iter().map(|&s| labels[s]).collect(),
        mse,
        effective_k,
        k_reduced: effective_k < k,
    })
}

fn kmeans_weighted(
    points: &Weighted,
    k: usize,
    params: KMeansParams,
) -> Result<(Vec<f64>, Vec<usize>, f64)> {
    if params.restarts == 0 || params.max_iter == 0 {
        return Err(Error::invalid_arg("restarts and max_iter must be >= 1"));
    }
    let mut best: Option<(Vec<f64>, Vec<usize>, f64)> = None;
    for restart in 0..params.restarts {
        let mut rng = SeededRng::derived(params.seed, &[restart as u64]);
        let init = seed_centres(points, k, &mut rng);
        let (centroids, labels) = lloyd(points, init, params.max_iter);
        let mse = partition_mse(points, &labels, &centroids);
        if best.as_ref().is_none_or(|b| mse < b.2) {
            best = Some((centroids, labels, mse));
        }
    }
    let (centroids, labels, mse) = best.expect("restarts >= 1");
    let (centroids, labels) = sort_centroids(centroids, labels);
    Ok((centroids, labels, mse))
}

/// Greedy k-means++ seeding: each further centre is the best (lowest
/// resulting potential) of a few distinct values drawn with probability
/// proportional to weight times squared distance to the nearest chosen centre.
fn seed_centres(points: &Weighted, k: usize, rng: &mut SeededRng) -> Vec<f64> {
    let trials = 2 + (k as f64).ln() as usize;
    let n = points.len();
    let mut init = Vec::with_capacity(k);
    init.push(points.values[rng.below(n as u64) as usize]);
    let mut d2: Vec<f64> = points
        .values
        .iter()
        .map(|&x| (x - init[0]).powi(2))
        .collect();
    while init.len() < k {
        let mass: Vec<f64> = d2.iter().zip(&points.weights).map(|(d, w)| d * w).collect();
        let total: f64 = mass.iter().sum();
        let mut best: Option<(f64, usize)> = None;
        for _ in 0..trials {
            let pick = draw_weighted(&mass, rng.uniform() * total);
            let c = points.values[pick];
            let potential: f64 = points
                .values
                .iter()
                .zip(&points.weights)
                .zip(&d2)
                .map(|((&x, &w), &d)| w * d.min((x - c).powi(2)))
                .sum();
            if best.is_none_or(|(p, _)| potential < p) {
                best = Some((potential, pick));
            }
        }
        let c = points.values[best.expect("trials >= 1").1];
        init.push(c);
        for (d, &x) in d2.iter_mut().zip(&points.values) {
            *d = d.min((x - c).powi(2));
        }
    }
    init
}

/// Index whose cumulative mass first exceeds `target`, skipping zero-mass
/// entries (already chosen values).
fn draw_weighted(mass: &[f64], mut target: f64) -> usize {
    for (i, &m) in mass.iter().enumerate() {
        if m > 0.0 && target < m {
            return i;
        }
        target -= m;
    }
    // rounding ran past the end
    mass.iter()
        .rposition(|&m| m > 0.0)
        .expect("k <= distinct values")
}

fn nearest(x: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, &m) in centroids.iter().enumerate() {
        let d = (x - m) * (x - m);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn cluster_means(points: &Weighted, labels: &[usize], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut sum = vec![0.0; k];
    let mut mass = vec![0.0; k];
    for ((&x, &w), &l) in points.values.iter().zip(&points.weights).zip(labels) {
        sum[l] += w * x;
        mass[l] += w;
    }
    let means = sum
        .iter()
        .zip(&mass)
        .map(|(&s, &m)| if m > 0.0 { s / m } else { f64::NAN })
        .collect();
    (means, mass)
}

/// Lloyd iteration from `init`; returns centroids equal to the means of the
/// returned labels.
fn lloyd(points: &Weighted, init: Vec<f64>, max_iter: usize) -> (Vec<f64>, Vec<usize>) {
    let k = init.len();
    let mut centroids = init;
    let mut labels: Vec<usize> = Vec::new();
    for _ in 0..max_iter {
        let next: Vec<usize> = points
            .values
            .iter()
            .map(|&x| nearest(x, &centroids))
            .collect();
        if next == labels {
            break;
        }
        labels = next;
        let (mut means, mut mass) = cluster_means(points, &labels, k);
        // empty cluster: take the point farthest from its centroid, drawn from
        // a cluster that keeps at least one point
        while let Some(empty) = mass.iter().position(|&m| m == 0.0) {
            let mut count = vec![0usize; k];
            labels.iter().for_each(|&l| count[l] += 1);
            let far = (0..points.len())
                .filter(|&p| count[labels[p]] > 1)
                .max_by(|&a, &b| {
                    let da = (points.values[a] - means[labels[a]]).abs();
                    let db = (points.values[b] - means[labels[b]]).abs();
                    // ties go to the lowest index
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .expect("k <= distinct values");
            labels[far] = empty;
            (means, mass) = cluster_means(points, &labels, k);
        }
        centroids = means;
    }
    (centroids, labels)
}

fn partition_mse(points: &Weighted, labels: &[usize], centroids: &[f64]) -> f64 {
    let sse: f64 = points
        .values
        .iter()
        .zip(&points.weights)
        .zip(labels)
        .map(|((&x, &w), &l)| w * (x - centroids[l]) * (x - centroids[l]))
        .sum();
    sse / points.total()
}

fn sort_centroids(centroids: Vec<f64>, labels: Vec<usize>) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..centroids.len()).collect();
    idx.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    let mut rank = vec![0; centroids.len()];
    for (r, &i) in idx.iter().enumerate() {
        rank[i] = r;
    }
    (
        idx.iter().map(|&i| centroids[i]).collect(),
        labels.iter().map(|&l| rank[l]).collect(),
    )
}

/// Globally optimal `K`-partition of the values into contiguous groups.
pub fn exact_quantize_1d(values: &[f64], k: usize) -> Result<Quantized1d> {
    check_k(k)?;
    let (points, slot) = Weighted::from_multiset(values)?;
    let n = points.len();
    let effective_k = k.min(n);

    // centred prefix sums keep the segment costs well conditioned
    let shift = points.values[n / 2];
    let mut w = vec![0.0; n + 1];
    let mut wx = vec![0.0; n + 1];
    let mut wxx = vec![0.0; n + 1];
    for i in 0..n {
        let x = points.values[i] - shift;
        let wi = points.weights[i];
        w[i + 1] = w[i] + wi;
        wx[i + 1] = wx[i] + wi * x;
        wxx[i + 1] = wxx[i] + wi * x * x;
    }
    // sum of squares of points a..b (exclusive end)
    let cost = |a: usize, b: usize| {
        let m = w[b] - w[a];
        let s = wx[b] - wx[a];
        (wxx[b] - wxx[a] - s * s / m).max(0.0)
    };

    // best[m][b]: optimal cost of the first b points in m + 1 groups
    let mut best = vec![vec![f64::INFINITY; n + 1]; effective_k];
    let mut split = vec![vec![0usize; n + 1]; effective_k];
    for (b, slot) in best[0].iter_mut().enumerate().skip(1) {
        *slot = cost(0, b);
    }
    for m in 1..effective_k {
        for b in (m + 1)..=n {
            for a in m..b {
                let c = best[m - 1][a] + cost(a, b);
                if c < best[m][b] {
                    best[m][b] = c;
                    split[m][b] = a;
                }
            }
        }
    }

    let mut labels = vec![0; n];
    let mut end = n;
    for m in (0..effective_k).rev() {
        let start = if m == 0 { 0 } else { split[m][end] };
        labels[start..end].iter_mut().for_each(|l| *l = m);
        end = start;
    }
    let (centroids, _) = cluster_means(&points, &labels, effective_k);
    let mse = partition_mse(&points, &labels, &centroids);
    Ok(Quantized1d {
        centroids,
        assignment: slot.iter().map(|&s| labels[s]).collect(),
        mse,
        effective_k,
        k_reduced: effective_k < k,
    })
}

/// Per-level codewords on the raw digit scale.
///
/// A level whose digits take fewer than `K` distinct values keeps only as many
/// centroids as it has values.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    base: u8,
    levels: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(base: u8, levels: Vec<Vec<f64>>) -> Result<Self> {
        if !(2..=10).contains(&base) {
            return Err(Error::invalid_arg(format!(
                "codebook base {base} outside 2..=10"
            )));
        }
        for (j, c) in levels.iter().enumerate() {
            if c.is_empty() || c.len() > usize::from(base) {
                return Err(Error::invalid_arg(format!(
                    "level {} has {} codewords for base {base}",
                    j + 1,
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) || c.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::invalid_arg(format!(
                    "level {} codewords are not strictly ascending",
                    j + 1
                )));
            }
        }
        Ok(Self { base, levels })
    }

    pub fn base(&self) -> u8 {
        self.base
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn codeword(&self, level: usize, digit: u8) -> f64 {
        self.levels[level][usize::from(digit)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationResult {
    pub encoded: DigitArray,
    pub codebook: Codebook,
    /// Mean over objects of the squared digit-to-codeword distance.
    pub mse_per_level: Vec<f64>,
    /// Levels where fewer than `K` distinct digits occurred.
    pub reduced_levels: Vec<usize>,
}

/// Quantizes every level of a decimal array independently into `K` classes.
pub fn encode_array(
    array: &DigitArray,
    k: usize,
    params: KMeansParams,
) -> Result<QuantizationResult> {
    if array.base() != SOURCE_BASE {
        return Err(Error::invalid_arg(format!(
            "expected a base-10 array, got base {}",
            array.base()
        )));
    }
    if !(2..=10).contains(&k) {
        return Err(Error::invalid_arg(format!(
            "target base {k} outside 2..=10"
        )));
    }
    if array.rows() == 0 {
        return Err(Error::invalid_arg("empty digit array"));
    }
    let rows = array.rows();
    let mut codewords = Vec::with_capacity(array.levels());
    let mut mse_per_level = Vec::with_capacity(array.levels());
    let mut reduced_levels = Vec::new();
    let mut columns = Vec::with_capacity(array.levels());
    for level in 0..array.levels() {
        let mut counts = [0usize; 10];
        array.level(level).for_each(|d| counts[usize::from(d)] += 1);
        let points = Weighted {
            values: (0..10u8)
                .filter(|&d| counts[usize::from(d)] > 0)
                .map(f64::from)
                .collect(),
            weights: counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| c as f64)
                .collect(),
        };
        let effective_k = k.min(points.len());
        if effective_k < k {
            reduced_levels.push(level);
        }
        // same seed on every level: the result depends only on the level's
        // digit multiset, so permuting levels permutes the output
        let (centroids, labels, mse) = kmeans_weighted(&points, effective_k, params)
            .map_err(|e| Error::InvalidState(format!("level {}: {e}", level + 1)))?;
        let mut class_of = [0u8; 10];
        for (&v, &l) in points.values.iter().zip(&labels) {
            class_of[v as usize] = l as u8;
        }
        columns.push(
            array
                .level(level)
                .map(|d| class_of[usize::from(d)])
                .collect::<Vec<_>>(),
        );
        codewords.push(centroids);
        mse_per_level.push(mse);
    }
    let mut cells = Vec::with_capacity(rows * array.levels());
    for r in 0..rows {
        cells.extend(columns.iter().map(|c| c[r]));
    }
    Ok(QuantizationResult {
        encoded: array.replace_cells(k as u8, cells)?,
        codebook: Codebook::new(k as u8, codewords)?,
        mse_per_level,
        reduced_levels,
    })
}

/// Real value of every encoded row: `sum_j codeword(j, digit) * 10^-j`.
pub fn decode_reals(q: &QuantizationResult) -> Vec<f64> {
    decode_with(&q.encoded, &q.codebook)
}

pub fn decode_with(encoded: &DigitArray, codebook: &Codebook) -> Vec<f64> {
    let weights: Vec<f64> = (1..=encoded.levels())
        .map(|j| f64::from(SOURCE_BASE).powi(-(j as i32)))
        .collect();
    encoded
        .iter_rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &d)| codebook.codeword(j, d) * weights[j])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_digits(n: usize) -> Vec<f64> {
        (0..n).flat_map(|_| (0..10).map(f64::from)).collect()
    }

    fn params(seed: u64) -> KMeansParams {
        KMeansParams {
            seed,
            ..KMeansParams::default()
        }
    }

    #[test]
    fn uniform_ten_classes_zero_mse() {
        let q = kmeans_1d(&uniform_digits(5), 10, params(1)).unwrap();
        assert_eq!(q.mse, 0.0);
        assert_eq!(q.centroids, (0..10).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn uniform_three_classes() {
        let q = kmeans_1d(&uniform_digits(7), 3, params(2)).unwrap();
        assert!((q.mse - 0.9).abs() < 1e-12, "{}", q.mse);
        // three optimal partitions tie: sizes 3-4-3, 3-3-4 and 4-3-3
        let optima = [
            vec![1.0, 4.5, 8.0],
            vec![1.0, 4.0, 7.5],
            vec![1.5, 5.0, 8.0],
        ];
        assert!(optima.contains(&q.centroids), "{:?}", q.centroids);
    }

    #[test]
    fn uniform_two_classes() {
        let q = kmeans_1d(&uniform_digits(3), 2, params(3)).unwrap();
        assert!((q.mse - 2.0).abs() < 1e-12);
        assert_eq!(q.centroids, vec![2.0, 7.0]);
    }

    #[test]
    fn exact_examples() {
        let q = exact_quantize_1d(&[0.0, 9.0], 2).unwrap();
        assert_eq!(q.centroids, vec![0.0, 9.0]);
        assert_eq!(q.mse, 0.0);
        let q = exact_quantize_1d(&[0.0, 1.0, 9.0], 2).unwrap();
        assert_eq!(q.centroids, vec![0.5, 9.0]);
        assert!((q.mse - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(q.assignment, vec![0, 0, 1]);
    }

    #[test]
    fn k_above_distinct_is_reduced() {
        let q = kmeans_1d(&[1.0, 1.0, 4.0], 5, params(0)).unwrap();
        assert!(q.k_reduced);
        assert_eq!(q.effective_k, 2);
        assert_eq!(q.mse, 0.0);
        let e = exact_quantize_1d(&[1.0, 1.0, 4.0], 5).unwrap();
        assert!(e.k_reduced);
        assert_eq!(e.centroids, vec![1.0, 4.0]);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(kmeans_1d(&[], 2, params(0)).is_err());
        assert!(kmeans_1d(&[1.0], 0, params(0)).is_err());
        assert!(exact_quantize_1d(&[f64::NAN], 1).is_err());
        let bad = KMeansParams {
            restarts: 0,
            ..KMeansParams::default()
        };
        assert!(kmeans_1d(&[1.0, 2.0], 1, bad).is_err());
    }

    #[test]
    fn assignment_matches_input_order() {
        let vals = [9.0, 0.0, 8.5, 0.5];
        let q = kmeans_1d(&vals, 2, params(4)).unwrap();
        assert_eq!(q.assignment, vec![1, 0, 1, 0]);
    }

    fn constant_array(d: u8, rows: usize, levels: usize) -> DigitArray {
        DigitArray::new(10, rows, levels, vec![d; rows * levels]).unwrap()
    }

    #[test]
    fn encode_constant_array() {
        let q = encode_array(&constant_array(5, 20, 3), 2, params(0)).unwrap();
        assert!(q.encoded.cells().iter().all(|&c| c == q.encoded.cells()[0]));
        assert_eq!(q.mse_per_level, vec![0.0; 3]);
        assert_eq!(q.reduced_levels, vec![0, 1, 2]);
        assert_eq!(q.codebook.levels(), &[vec![5.0], vec![5.0], vec![5.0]]);
        let decoded = decode_reals(&q);
        assert!(decoded.iter().all(|&v| v == decoded[0]));
        assert!((decoded[0] - 0.555).abs() < 1e-15);
    }

    #[test]
    fn encode_uniform_level() {
        let level: Vec<u8> = (0..1000).map(|i| (i % 10) as u8).collect();
        let a = DigitArray::from_levels(10, &[level]).unwrap();
        let q = encode_array(&a, 3, params(5)).unwrap();
        assert!((q.mse_per_level[0] - 0.9).abs() < 1e-12);
        assert_eq!(q.encoded.base(), 3);
    }

    #[test]
    fn encode_ten_is_relabeling() {
        let a = DigitArray::from_levels(10, &[vec![3, 7, 7, 0, 9], vec![1, 1, 2, 2, 8]]).unwrap();
        let q = encode_array(&a, 10, params(0)).unwrap();
        assert_eq!(q.mse_per_level, vec![0.0, 0.0]);
        assert_eq!(q.encoded.cells(), &[1, 0, 2, 0, 2, 1, 0, 1, 3, 2]);
        // same digit <-> same code, per level
        for level in 0..2 {
            for r in 0..5 {
                for s in 0..5 {
                    assert_eq!(
                        a.get(r, level) == a.get(s, level),
                        q.encoded.get(r, level) == q.encoded.get(s, level)
                    );
                }
            }
        }
    }

    #[test]
    fn encode_rejects_bad_input() {
        let a = DigitArray::new(4, 1, 1, vec![0]).unwrap();
        assert!(encode_array(&a, 2, params(0)).is_err());
        let a = constant_array(1, 2, 2);
        assert!(encode_array(&a, 1, params(0)).is_err());
        assert!(encode_array(&a, 11, params(0)).is_err());
    }

    #[test]
    fn identity_codebook_decodes_truncation() {
        let a = DigitArray::from_rows(10, &[vec![3, 7, 5], vec![0, 0, 1]]).unwrap();
        let q = QuantizationResult {
            encoded: a.clone(),
            codebook: Codebook::new(10, vec![(0..10).map(f64::from).collect(); 3]).unwrap(),
            mse_per_level: vec![0.0; 3],
            reduced_levels: vec![],
        };
        let d = decode_reals(&q);
        assert!((d[0] - 0.375).abs() < 1e-15);
        assert!((d[1] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn codebook_validation() {
        assert!(Codebook::new(3, vec![vec![1.0, 1.0]]).is_err());
        assert!(Codebook::new(2, vec![vec![0.0, 1.0, 2.0]]).is_err());
        assert!(Codebook::new(2, vec![vec![]]).is_err());
        assert!(Codebook::new(1, vec![vec![0.0]]).is_err());
        assert!(Codebook::new(2, vec![vec![0.0, 4.5]]).is_ok());
    }
}
