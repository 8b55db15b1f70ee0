//! Evaluation apparatus: Ward clustering of 1D values, cophenetic distances,
//! correlations, digit histograms and ultrametricity checks.

use std::fmt::Write as _;

use crate::baire::{baire_distance, DigitArray};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Largest input accepted by [`ward_cluster`]; the distance matrix is O(I^2).
pub const MAX_WARD_OBJECTS: usize = 20_000;
pub const DEFAULT_EVAL_OBJECTS: usize = 2_000;

/// Merge of two clusters. Leaves are `0..n`, the cluster created by merge
/// `s` is `n + s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// Increase in within-cluster sum of squares caused by the merge.
    pub level: f64,
    pub size: usize,
}

/// Ranked binary tree; merge levels are non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }
}

/// Symmetric distances over `n` objects in condensed (upper triangle) form.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSummary {
    n: usize,
    condensed: Vec<f64>,
}

impl DistanceSummary {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut condensed = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                condensed.push(f(i, j));
            }
        }
        Self { n, condensed }
    }

    /// Absolute differences of 1D values.
    pub fn absolute(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| (values[i] - values[j]).abs())
    }

    /// Baire distances between the rows of a digit array.
    pub fn baire(array: &DigitArray) -> Self {
        Self::from_fn(array.rows(), |i, j| {
            baire_distance(array.row(i), array.row(j), array.base()).expect("rows of one array")
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn condensed(&self) -> &[f64] {
        &self.condensed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.condensed[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.condensed[condensed_index(self.n, j, i)],
        }
    }
}

fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    n * i - i * (i + 1) / 2 + (j - i - 1)
}

/// Ward's minimum variance clustering of 1D values.
///
/// Merge costs live in a condensed matrix and are updated with the
/// Lance-Williams recurrence
///
/// ```text
/// d(k, i+j) = ((n_i + n_k) d(k, i) + (n_j + n_k) d(k, j) - n_k d(i, j)) / (n_i + n_j + n_k)
/// ```
///
/// starting from `d(a, b) = (x_a - x_b)^2 / 2`, so each level is the growth
/// of the within-cluster sum of squares; two points at gap `g` merge at
/// `g^2 / 2`. Merges are found with the nearest-neighbour chain (valid since
/// Ward linkage is reducible) and then ordered by level; ties prefer the
/// smallest indices.
pub fn ward_cluster(values: &[f64]) -> Result<Dendrogram> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid_arg(format!(
            "need at least 2 values, got {n}"
        )));
    }
    if n > MAX_WARD_OBJECTS {
        return Err(Error::invalid_arg(format!(
            "{n} values exceed the Ward limit of {MAX_WARD_OBJECTS}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_arg("non-finite value"));
    }
    let mut dist = DistanceSummary::from_fn(n, |i, j| {
        let g = values[i] - values[j];
        g * g / 2.0
    })
    .condensed;
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1);
    let mut chain: Vec<usize> = Vec::new();
    let d = |dist: &[f64], a: usize, b: usize| {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        dist[condensed_index(n, i, j)]
    };

    while raw.len() < n - 1 {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("active cluster"));
        }
        let a = *chain.last().unwrap();
        let prev = chain.len().checked_sub(2).map(|p| chain[p]);
        let mut best = prev;
        let mut best_d = prev.map_or(f64::INFINITY, |p| d(&dist, a, p));
        for (b, &alive) in active.iter().enumerate() {
            if b == a || !alive || Some(b) == prev {
                continue;
            }
            let db = d(&dist, a, b);
            // strict: ties keep the chain predecessor, then the lowest index
            if db < best_d {
                best = Some(b);
                best_d = db;
            }
        }
        let b = best.expect("at least two active clusters");
        if Some(b) != prev {
            chain.push(b);
            continue;
        }
        chain.truncate(chain.len() - 2);
        let (keep, gone) = (a.min(b), a.max(b));
        let (ni, nj) = (size[keep] as f64, size[gone] as f64);
        let dij = best_d;
        for k in 0..n {
            if !active[k] || k == keep || k == gone {
                continue;
            }
            let nk = size[k] as f64;
            let updated = ((ni + nk) * d(&dist, k, keep) + (nj + nk) * d(&dist, k, gone)
                - nk * dij)
                / (ni + nj + nk);
            let (i, j) = if k < keep { (k, keep) } else { (keep, k) };
            dist[condensed_index(n, i, j)] = updated;
        }
        active[gone] = false;
        size[keep] += size[gone];
        raw.push((keep, gone, dij));
    }

    // stable: equal levels keep discovery order, children before parents
    raw.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut node = (0..n).collect::<Vec<_>>();
    let mut count = vec![1usize; n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let merges = raw
        .iter()
        .enumerate()
        .map(|(s, &(a, b, level))| {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            let (ia, ib) = (node[ra], node[rb]);
            parent[rb] = ra;
            count[ra] += count[rb];
            node[ra] = n + s;
            Merge {
                left: ia.min(ib),
                right: ia.max(ib),
                level,
                size: count[ra],
            }
        })
        .collect();
    Ok(Dendrogram { leaves: n, merges })
}

/// Distance between two leaves = level of their lowest common ancestor.
pub fn cophenetic_distances(tree: &Dendrogram) -> DistanceSummary {
    let n = tree.leaves;
    let mut condensed = vec![0.0; n * n.saturating_sub(1) / 2];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    members.reserve(tree.merges.len());
    for m in &tree.merges {
        let left = std::mem::take(&mut members[m.left]);
        let right = std::mem::take(&mut members[m.right]);
        for &a in &left {
            for &b in &right {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                condensed[condensed_index(n, i, j)] = m.level;
            }
        }
        let mut joined = left;
        joined.extend(right);
        members.push(joined);
    }
    DistanceSummary { n, condensed }
}

/// Product-moment correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid_arg(format!(
            "lengths {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid_arg("need at least 2 pairs"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Per-level digit counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitHistogram {
    pub base: u8,
    /// `counts[level][digit]`
    pub counts: Vec<Vec<usize>>,
}

impl DigitHistogram {
    /// CSV `level,0,1,...,base-1`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level");
        for d in 0..self.base {
            let _ = write!(s, ",{d}");
        }
        s.push('\n');
        for (l, row) in self.counts.iter().enumerate() {
            let _ = write!(s, "{}", l + 1);
            for c in row {
                let _ = write!(s, ",{c}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn digit_histogram(array: &DigitArray) -> DigitHistogram {
    let mut counts = vec![vec![0usize; usize::from(array.base())]; array.levels()];
    for row in array.iter_rows() {
        for (l, &d) in row.iter().enumerate() {
            counts[l][usize::from(d)] += 1;
        }
    }
    DigitHistogram {
        base: array.base(),
        counts,
    }
}

/// Ordered triples `(x, y, z)` of distinct objects with
/// `d(x, z) > max(d(x, y), d(y, z)) + tol`.
pub fn ultrametric_violations(d: &DistanceSummary, tol: f64) -> usize {
    let n = d.len();
    let mut count = 0;
    for x in 0..n {
        for z in (x + 1)..n {
            let dxz = d.get(x, z);
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                if dxz > d.get(x, y).max(d.get(y, z)) + tol {
                    // (x, y, z) and (z, y, x)
                    count += 2;
                }
            }
        }
    }
    count
}

/// Comparison of the consensus values with their decoded low-base encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub objects: usize,
    pub sample_size: usize,
    pub sample_seed: u64,
    /// Correlation of the consensus values with the decoded values (all objects).
    pub corr_values: Option<f64>,
    /// Input distances vs Ward cophenetic distances, consensus values.
    pub corr_cophenetic_original: Option<f64>,
    /// Input distances vs Ward cophenetic distances, decoded values.
    pub corr_cophenetic_encoded: Option<f64>,
    /// The two sets of input distances.
    pub corr_input_distances: Option<f64>,
    /// The two sets of cophenetic distances.
    pub corr_cophenetic_pair: Option<f64>,
    pub violations_original: usize,
    pub violations_encoded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    /// Objects used for the O(I^2) distance comparisons.
    pub max_objects: usize,
    pub seed: u64,
    /// Run the O(I^3) ultrametricity check on the cophenetic matrices.
    pub check_ultrametric: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            max_objects: DEFAULT_EVAL_OBJECTS,
            seed: 0,
            check_ultrametric: false,
        }
    }
}

/// Runs the comparison on two aligned value vectors.
pub fn evaluate(original: &[f64], decoded: &[f64], cfg: EvalConfig) -> Result<EvalReport> {
    if original.len() != decoded.len() {
        return Err(Error::invalid_arg("value vectors differ in length"));
    }
    let objects = original.len();
    if objects < 2 {
        return Err(Error::invalid_arg("need at least 2 objects"));
    }
    let max_objects = cfg.max_objects.clamp(2, MAX_WARD_OBJECTS);
    let mut sample: Vec<usize> = if objects > max_objects {
        SeededRng::new(cfg.seed).sample_indices(objects, max_objects)
    } else {
        (0..objects).collect()
    };
    sample.sort_unstable();
    let a: Vec<f64> = sample.iter().map(|&i| original[i]).collect();
    let b: Vec<f64> = sample.iter().map(|&i| decoded[i]).collect();

    let in_a = DistanceSummary::absolute(&a);
    let in_b = DistanceSummary::absolute(&b);
    let coph_a = cophenetic_distances(&ward_cluster(&a)?);
    let coph_b = cophenetic_distances(&ward_cluster(&b)?);
    let corr =
        |x: &DistanceSummary, y: &DistanceSummary| pearson(x.condensed(), y.condensed()).ok();
    let (violations_original, violations_encoded) = if cfg.check_ultrametric {
        (
            ultrametric_violations(&coph_a, 1e-12),
            ultrametric_violations(&coph_b, 1e-12),
        )
    } else {
        (0, 0)
    };
    Ok(EvalReport {
        objects,
        sample_size: sample.len(),
        sample_seed: cfg.seed,
        corr_values: pearson(original, decoded).ok(),
        corr_cophenetic_original: corr(&in_a, &coph_a),
        corr_cophenetic_encoded: corr(&in_b, &coph_b),
        corr_input_distances: corr(&in_a, &in_b),
        corr_cophenetic_pair: corr(&coph_a, &coph_b),
        violations_original,
        violations_encoded,
    })
}

fn fmt_corr(c: Option<f64>) -> String {
    c.map_or_else(|| "undefined".to_string(), |v| format!("{v:.16e}"))
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("measure,value\n");
        for (name, v) in self.rows() {
            let _ = writeln!(s, "{name},{v}");
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "evaluation report");
        let _ = writeln!(
            s,
            "objects: {} (distance comparisons on {} sampled with seed {})",
            self.objects, self.sample_size, self.sample_seed
        );
        for (name, v) in self.rows() {
            let _ = writeln!(s, "{name}: {v}");
        }
        s
    }

    fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("corr_values", fmt_corr(self.corr_values)),
            (
                "corr_cophenetic_original",
                fmt_corr(self.corr_cophenetic_original),
            ),
            (
                "corr_cophenetic_encoded",
                fmt_corr(self.corr_cophenetic_encoded),
            ),
            ("corr_input_distances", fmt_corr(self.corr_input_distances)),
            ("corr_cophenetic_pair", fmt_corr(self.corr_cophenetic_pair)),
            (
                "ultrametric_violations_original",
                self.violations_original.to_string(),
            ),
            (
                "ultrametric_violations_encoded",
                self.violations_encoded.to_string(),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ward_joins_zeros_first() {
        let t = ward_cluster(&[0.0, 0.0, 10.0]).unwrap();
        assert_eq!(t.merges()[0].left, 0);
        assert_eq!(t.merges()[0].right, 1);
        assert_eq!(t.merges()[0].level, 0.0);
        assert_eq!(t.merges()[1].left, 2);
        assert_eq!(t.merges()[1].right, 3);
        assert_eq!(t.merges()[1].size, 3);
        // {0,0} vs {10}: 2*1/3 * 10^2
        assert!((t.merges()[1].level - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ward_two_points_half_squared_gap() {
        let t = ward_cluster(&[1.0, 4.0]).unwrap();
        assert_eq!(t.merges().len(), 1);
        assert_eq!(t.merges()[0].level, 4.5);
    }

    #[test]
    fn ward_duplicates_first() {
        let t = ward_cluster(&[5.0, 1.0, 3.0, 5.0, 1.2]).unwrap();
        let first = t.merges()[0];
        assert_eq!((first.left, first.right, first.level), (0, 3, 0.0));
    }

    #[test]
    fn ward_rejects_small_input() {
        assert!(ward_cluster(&[1.0]).is_err());
        assert!(ward_cluster(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn cophenetic_two_leaves() {
        let d = cophenetic_distances(&ward_cluster(&[0.0, 2.0]).unwrap());
        assert_eq!(d.condensed(), &[2.0]);
        assert_eq!(d.get(1, 0), 2.0);
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn pearson_identities() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let aff: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&x, &aff).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            pearson(&x, &[1.0; 4]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson(&x, &x[..3]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn histogram_counts() {
        let a = DigitArray::new(4, 3, 2, vec![1, 1, 1, 1, 1, 1]).unwrap();
        let h = digit_histogram(&a);
        assert_eq!(h.counts, vec![vec![0, 3, 0, 0], vec![0, 3, 0, 0]]);
        assert_eq!(h.to_csv(), "level,0,1,2,3\n1,0,3,0,0\n2,0,3,0,0\n");
        let b = DigitArray::from_levels(10, &[vec![0, 5, 5, 9]]).unwrap();
        assert_eq!(digit_histogram(&b).counts[0].iter().sum::<usize>(), 4);
    }

    #[test]
    fn collinear_points_violate() {
        let d = DistanceSummary::absolute(&[0.0, 1.0, 3.0]);
        // d(0,3) = 3 > max(1, 2) for (x,y,z) = (0,1,3) and (3,1,0)
        assert_eq!(ultrametric_violations(&d, 0.0), 2);
    }

    #[test]
    fn baire_distances_are_ultrametric() {
        let a = DigitArray::from_rows(
            3,
            &[
                vec![0, 1, 2],
                vec![0, 1, 0],
                vec![0, 2, 2],
                vec![1, 1, 1],
                vec![0, 1, 2],
            ],
        )
        .unwrap();
        assert_eq!(ultrametric_violations(&DistanceSummary::baire(&a), 0.0), 0);
    }

    #[test]
    fn report_renders() {
        let orig: Vec<f64> = (0..30).map(|i| f64::from(i) / 30.0).collect();
        let dec: Vec<f64> = orig.iter().map(|v| (v * 4.0).floor() / 4.0).collect();
        let r = evaluate(
            &orig,
            &dec,
            EvalConfig {
                max_objects: 20,
                seed: 3,
                check_ultrametric: true,
            },
        )
        .unwrap();
        assert_eq!(r.sample_size, 20);
        assert_eq!(r.violations_original, 0);
        assert_eq!(r.violations_encoded, 0);
        assert!(r.corr_values.unwrap() > 0.9);
        assert!(r.to_csv().starts_with("measure,value\ncorr_values,"));
        assert!(r.to_text().contains("sampled with seed 3"));
    }
}
