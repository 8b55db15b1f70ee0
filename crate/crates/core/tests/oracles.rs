//! Library routines checked against slow, independent reference implementations.

use padic_core::baire::{baire_distance, DigitArray, PrefixIndex};
use padic_core::eval::{cophenetic_distances, ward_cluster};
use padic_core::ingest::{extract_digits, ConsensusVector};
use padic_core::io::packed::{bits_per_digit, encode, HEADER_LEN};
use padic_core::quantize::{exact_quantize_1d, kmeans_1d, KMeansParams};
use padic_core::rng::SeededRng;
use padic_core::synth::uniform_digits;

/// Decimal digits read off the exact decimal expansion of the double.
fn digits_from_string(v: f64, j: usize) -> Vec<u8> {
    let s = format!("{v:.1100}");
    let frac = s.split_once('.').unwrap().1;
    frac.bytes().take(j).map(|b| b - b'0').collect()
}

#[test]
fn digit_extraction_matches_exact_expansion() {
    let mut rng = SeededRng::new(11);
    let mut values: Vec<f64> = (0..2000).map(|_| rng.uniform()).collect();
    values.extend([
        0.0,
        0.1,
        0.29,
        0.5,
        0.999_999_999_999,
        1e-300,
        0.123_456_789_012_345_67,
    ]);
    let c = ConsensusVector::from_values(values.clone(), 0, 1).unwrap();
    for j in [1, 8, 15, 19] {
        let a = extract_digits(&c, j).unwrap();
        for r in 0..a.rows() {
            let v = values[a.order()[r]];
            assert_eq!(
                a.row(r),
                digits_from_string(v, j).as_slice(),
                "v={v:e} J={j}"
            );
        }
    }
}

fn brute_prefix(array: &DigitArray, prefix: &str) -> Vec<usize> {
    let want: Vec<u8> = prefix.bytes().map(|b| b - b'0').collect();
    (0..array.rows())
        .filter(|&r| array.row(r).starts_with(&want))
        .map(|r| array.order()[r])
        .collect()
}

#[test]
fn prefix_query_matches_scan() {
    let a = uniform_digits(10, 3000, 6, 4).unwrap();
    let mut rng = SeededRng::new(5);
    for depth in 1..=4 {
        let index = PrefixIndex::build(&a, depth).unwrap();
        for _ in 0..200 {
            let prefix: String = (0..depth)
                .map(|_| char::from(b'0' + rng.below(10) as u8))
                .collect();
            let mut got = index.query(&prefix).unwrap().to_vec();
            got.sort_unstable();
            let mut want = brute_prefix(&a, &prefix);
            want.sort_unstable();
            assert_eq!(got, want, "prefix {prefix}");
        }
    }
}

#[test]
fn baire_distance_matches_definition() {
    let a = uniform_digits(3, 100, 5, 8).unwrap();
    for x in 0..a.rows() {
        for y in 0..a.rows() {
            let (p, q) = (a.row(x), a.row(y));
            let beta = (0..5).find(|&k| p[k] != q[k]).unwrap_or(5);
            let want = 3f64.powi(-(beta as i32));
            assert_eq!(baire_distance(p, q, 3).unwrap(), want);
        }
    }
}

/// Optimal contiguous partition by exhaustive enumeration of cut points.
fn brute_quantize(values: &[f64], k: usize) -> f64 {
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let d = distinct.len();
    let k = k.min(d);
    let mut best = f64::INFINITY;
    // bit i set: cut between distinct[i] and distinct[i + 1]
    for mask in 0u32..(1 << (d - 1)) {
        if mask.count_ones() as usize != k - 1 {
            continue;
        }
        let mut group = vec![0usize; d];
        for i in 1..d {
            group[i] = group[i - 1] + ((mask >> (i - 1)) & 1) as usize;
        }
        let gid = |v: f64| group[distinct.iter().position(|&x| x == v).unwrap()];
        let mut sum = vec![0.0; k];
        let mut cnt = vec![0.0; k];
        for &v in values {
            sum[gid(v)] += v;
            cnt[gid(v)] += 1.0;
        }
        let sse: f64 = values
            .iter()
            .map(|&v| {
                let g = gid(v);
                (v - sum[g] / cnt[g]).powi(2)
            })
            .sum();
        best = best.min(sse / values.len() as f64);
    }
    best
}

#[test]
fn exact_quantizer_matches_enumeration() {
    let mut rng = SeededRng::new(21);
    for _ in 0..150 {
        let n = 5 + rng.below(60) as usize;
        let alphabet = 2 + rng.below(9);
        let values: Vec<f64> = (0..n).map(|_| rng.below(alphabet) as f64).collect();
        for k in 1..=10 {
            let exact = exact_quantize_1d(&values, k).unwrap();
            let want = brute_quantize(&values, k);
            assert!(
                (exact.mse - want).abs() < 1e-12,
                "k={k} {} vs {want}",
                exact.mse
            );
        }
    }
}

/// Multi-start Lloyd is a heuristic; near-uniform digit levels are its
/// hardest case. It must still reach the optimum on at least 99% of them.
#[test]
fn kmeans_reaches_enumerated_optimum_on_digit_levels() {
    let mut rng = SeededRng::new(22);
    let params = KMeansParams::default();
    let total = 300;
    let mut misses = 0;
    for _ in 0..total {
        let values: Vec<f64> = (0..200).map(|_| rng.below(10) as f64).collect();
        let k = 2 + rng.below(8) as usize;
        let q = kmeans_1d(&values, k, params).unwrap();
        if (q.mse - brute_quantize(&values, k)).abs() >= 1e-9 {
            misses += 1;
        }
    }
    assert!(
        misses * 100 <= total,
        "{misses} of {total} runs missed the optimum"
    );
}

fn sse(members: &[usize], x: &[f64]) -> f64 {
    let mean = members.iter().map(|&i| x[i]).sum::<f64>() / members.len() as f64;
    members.iter().map(|&i| (x[i] - mean).powi(2)).sum()
}

/// Greedy Ward by direct SSE recomputation; returns merge levels and the
/// cophenetic matrix.
fn naive_ward(x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut coph = vec![vec![0.0; n]; n];
    let mut levels = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut u = clusters[a].clone();
                u.extend(&clusters[b]);
                let inc = sse(&u, x) - sse(&clusters[a], x) - sse(&clusters[b], x);
                if inc < best.0 {
                    best = (inc, a, b);
                }
            }
        }
        let (inc, a, b) = best;
        for &i in &clusters[a] {
            for &j in &clusters[b] {
                coph[i][j] = inc;
                coph[j][i] = inc;
            }
        }
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        levels.push(inc);
    }
    (levels, coph)
}

#[test]
fn ward_matches_naive_agglomeration() {
    let mut rng = SeededRng::new(31);
    for n in [2, 3, 7, 25, 60] {
        let x: Vec<f64> = (0..n).map(|_| rng.uniform() * 100.0).collect();
        let tree = ward_cluster(&x).unwrap();
        let (levels, coph) = naive_ward(&x);
        let got: Vec<f64> = tree.merges().iter().map(|m| m.level).collect();
        assert_eq!(got.len(), levels.len());
        for (g, w) in got.iter().zip(&levels) {
            assert!((g - w).abs() <= 1e-9 * w.max(1.0), "{g} vs {w}");
        }
        let d = cophenetic_distances(&tree);
        for (i, row) in coph.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                if i != j {
                    assert!((d.get(i, j) - want).abs() <= 1e-9 * want.max(1.0));
                }
            }
        }
    }
}

/// Reads digit `k` bit by bit, least significant bit first.
fn read_bits(payload: &[u8], bits: u32, k: usize) -> u8 {
    let mut v = 0u8;
    for b in 0..bits as usize {
        let pos = k * bits as usize + b;
        let bit = (payload[pos / 8] >> (pos % 8)) & 1;
        v |= bit << b;
    }
    v
}

#[test]
fn packed_payload_layout() {
    for base in 2..=10u8 {
        let a = uniform_digits(base, 37, 5, u64::from(base)).unwrap();
        let bytes = encode(&a, 1, 99);
        assert_eq!(&bytes[..4], b"BAIR");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(bytes[6], base);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 99);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 37);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 5);
        let bits = bits_per_digit(base);
        let payload = &bytes[HEADER_LEN..];
        assert_eq!(payload.len(), (37 * 5 * bits as usize).div_ceil(8));
        for (k, &cell) in a.cells().iter().enumerate() {
            assert_eq!(read_bits(payload, bits, k), cell);
        }
    }
}
