use proptest::prelude::*;

use padic_core::baire::{baire_distance, layer_cluster_counts, DigitArray};
use padic_core::eval::{
    cophenetic_distances, ultrametric_violations, ward_cluster, DistanceSummary,
};
use padic_core::ingest::{extract_digits, ConsensusVector};
use padic_core::io::packed::{decode, encode};
use padic_core::quantize::{
    decode_reals, encode_array, exact_quantize_1d, kmeans_1d, KMeansParams,
};
use padic_core::reduce::{reduce_base_once, reduce_chain};

fn digit_array(max_rows: usize, max_levels: usize) -> impl Strategy<Value = DigitArray> {
    (2u8..=10, 1..=max_rows, 1..=max_levels).prop_flat_map(|(base, rows, levels)| {
        proptest::collection::vec(0..base, rows * levels)
            .prop_map(move |cells| DigitArray::new(base, rows, levels, cells).unwrap())
    })
}

fn quick() -> KMeansParams {
    KMeansParams {
        restarts: 5,
        max_iter: 100,
        seed: 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn baire_is_ultrametric(a in digit_array(12, 6)) {
        let d = DistanceSummary::baire(&a);
        prop_assert_eq!(ultrametric_violations(&d, 0.0), 0);
        for x in 0..a.rows() {
            prop_assert_eq!(baire_distance(a.row(x), a.row(x), a.base()).unwrap(),
                f64::from(a.base()).powi(-(a.levels() as i32)));
        }
    }

    #[test]
    fn ward_cophenetic_is_ultrametric(x in proptest::collection::vec(-50.0f64..50.0, 2..40)) {
        let tree = ward_cluster(&x).unwrap();
        let levels: Vec<f64> = tree.merges().iter().map(|m| m.level).collect();
        prop_assert!(levels.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(ultrametric_violations(&cophenetic_distances(&tree), 1e-9), 0);
    }

    #[test]
    fn packed_round_trip(a in digit_array(40, 9), seed in any::<u64>()) {
        let back = decode(&encode(&a, 1, seed)).unwrap();
        prop_assert_eq!(back.seed, seed);
        prop_assert_eq!(back.array.cells(), a.cells());
        prop_assert_eq!(back.array.base(), a.base());
    }

    #[test]
    fn digits_round_trip_within_last_place(v in proptest::collection::vec(0.0f64..1.0, 1..30), j in 1usize..=15) {
        let c = ConsensusVector::from_values(v.clone(), 0, 1).unwrap();
        let a = extract_digits(&c, j).unwrap();
        for r in 0..a.rows() {
            let x = v[a.order()[r]];
            let back: f64 = a.row(r).iter().enumerate().map(|(k, &d)| f64::from(d) * 10f64.powi(-(k as i32 + 1))).sum();
            prop_assert!(back <= x + 1e-15 && x - back < 10f64.powi(-(j as i32)) + 1e-15, "{} {}", x, back);
        }
        // rows follow ascending value
        for r in 1..a.rows() {
            prop_assert!(v[a.order()[r - 1]] <= v[a.order()[r]]);
        }
    }

    #[test]
    fn reduction_preserves_order_and_only_merges(a in digit_array(30, 5)) {
        prop_assume!(a.base() >= 3 && a.rows() >= 2);
        let (out, step) = reduce_base_once(&a).unwrap();
        prop_assert_eq!(out.base(), a.base() - 1);
        prop_assert!(out.cells().iter().all(|&c| c < out.base()));
        for (&x, &y) in a.cells().iter().zip(out.cells()) {
            prop_assert_eq!(y, if x >= step.merge_value { x - 1 } else { x });
        }
        for level in 0..a.levels() {
            let before: std::collections::BTreeSet<u8> = a.level(level).collect();
            let after: std::collections::BTreeSet<u8> = out.level(level).collect();
            prop_assert!(after.len() <= before.len());
            let col_a: Vec<u8> = a.level(level).collect();
            let col_b: Vec<u8> = out.level(level).collect();
            for i in 0..col_a.len() {
                for k in 0..col_a.len() {
                    if col_a[i] <= col_a[k] {
                        prop_assert!(col_b[i] <= col_b[k]);
                    }
                }
            }
        }
        // prefix classes only coarsen
        let before = layer_cluster_counts(&a).counts;
        let after = layer_cluster_counts(&out).counts;
        prop_assert!(after.iter().zip(&before).all(|(x, y)| x <= y));
    }

    #[test]
    fn chain_reaches_every_base(a in digit_array(20, 4), target in 2u8..9) {
        prop_assume!(a.base() == 10 && a.rows() >= 2);
        let chain = reduce_chain(&a, target).unwrap();
        let bases: Vec<u8> = chain.iter().map(|(x, _)| x.base()).collect();
        prop_assert_eq!(bases, (target..10).rev().collect::<Vec<_>>());
    }

    #[test]
    fn kmeans_never_beats_exact(v in proptest::collection::vec(0u8..10, 1..60), k in 1usize..10) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let exact = exact_quantize_1d(&v, k).unwrap();
        let heur = kmeans_1d(&v, k, quick()).unwrap();
        prop_assert!(exact.mse <= heur.mse + 1e-12);
        prop_assert!(heur.centroids.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(heur.effective_k, exact.effective_k);
    }

    #[test]
    fn encode_decode_error_bound(rows in proptest::collection::vec(proptest::collection::vec(0u8..10, 4), 2..60), k in 2usize..=10) {
        let a = DigitArray::from_rows(10, &rows).unwrap();
        let q = encode_array(&a, k, quick()).unwrap();
        prop_assert!(q.encoded.cells().iter().all(|&c| usize::from(c) < k));
        let decoded = decode_reals(&q);
        let exact: Vec<f64> = (0..a.rows())
            .map(|r| a.row(r).iter().enumerate().map(|(j, &d)| f64::from(d) * 10f64.powi(-(j as i32 + 1))).sum())
            .collect();
        let err: f64 = decoded.iter().zip(&exact).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / exact.len() as f64;
        let bound: f64 = q.mse_per_level.iter().enumerate().map(|(j, m)| m.sqrt() * 10f64.powi(-(j as i32 + 1))).sum::<f64>().powi(2);
        prop_assert!(err <= bound + 1e-12, "{} > {}", err, bound);
    }

    #[test]
    fn level_permutation_permutes_mse(rows in proptest::collection::vec(proptest::collection::vec(0u8..10, 3), 5..40), k in 2usize..=9) {
        let a = DigitArray::from_rows(10, &rows).unwrap();
        let swapped: Vec<Vec<u8>> = rows.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
        let b = DigitArray::from_rows(10, &swapped).unwrap();
        let qa = encode_array(&a, k, quick()).unwrap();
        let qb = encode_array(&b, k, quick()).unwrap();
        prop_assert_eq!(&qb.mse_per_level, &vec![qa.mse_per_level[2], qa.mse_per_level[0], qa.mse_per_level[1]]);
        prop_assert_eq!(&qb.codebook.levels()[0], &qa.codebook.levels()[2]);
    }

    #[test]
    fn encoding_preserves_digit_order(rows in proptest::collection::vec(proptest::collection::vec(0u8..10, 2), 2..50), k in 2usize..=9) {
        let a = DigitArray::from_rows(10, &rows).unwrap();
        let q = encode_array(&a, k, quick()).unwrap();
        for j in 0..2 {
            let src: Vec<u8> = a.level(j).collect();
            let enc: Vec<u8> = q.encoded.level(j).collect();
            for i in 0..src.len() {
                for m in 0..src.len() {
                    if src[i] <= src[m] {
                        prop_assert!(enc[i] <= enc[m]);
                    }
                }
            }
        }
    }
}
