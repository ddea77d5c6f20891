mod common;

use common::{dijkstra_all_pairs, rng};
use heatreg::datasets::Point;
use heatreg::metricspace::{
    euclidean, floyd_warshall, floyd_warshall_matrix_form, knn_graph, pairwise_distances,
    DistanceMatrix, Metric,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn random_points(seed: u64, n: usize, dim: usize) -> Vec<Point> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| Point::new((0..dim).map(|_| r.random_range(-2.0..2.0)).collect()))
        .collect()
}

/// Symmetric dissimilarities with small integer values, for which every path
/// sum is exact in floating point regardless of association order.
fn integer_dissimilarities(seed: u64, n: usize) -> DistanceMatrix {
    let mut r = rng(seed);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = r.random_range(1..100) as f64;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DistanceMatrix::from_matrix(d, Metric::Euclidean).unwrap()
}

#[test]
fn integer_weights_match_dijkstra_exactly() {
    for seed in 0..50u64 {
        let n = 2 + (seed as usize * 13) % 49;
        let d = integer_dissimilarities(seed, n);
        let k = 1 + seed as usize % 4.min(n - 1);
        let g = knn_graph(&d, k.min(n - 1)).unwrap();
        let oracle = dijkstra_all_pairs(g.adjacency());
        assert_eq!(floyd_warshall(&g).matrix(), &oracle, "seed {seed}");
        assert_eq!(
            floyd_warshall_matrix_form(&g, n).unwrap().matrix(),
            &oracle,
            "seed {seed}"
        );
    }
}

#[test]
fn point_clouds_match_dijkstra_to_rounding() {
    for seed in 0..30u64 {
        let n = 5 + seed as usize;
        let d = pairwise_distances(&random_points(seed, n, 3)).unwrap();
        let g = knn_graph(&d, 3).unwrap();
        let oracle = dijkstra_all_pairs(g.adjacency());
        let fw = floyd_warshall(&g);
        for (a, b) in fw.matrix().iter().zip(oracle.iter()) {
            assert!(a == b || (a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
        }
        assert_eq!(floyd_warshall_matrix_form(&g, n).unwrap(), fw);
    }
}

#[test]
fn fewer_passes_never_undercut_the_full_result() {
    let d = pairwise_distances(&random_points(3, 30, 2)).unwrap();
    let g = knn_graph(&d, 2).unwrap();
    let full = floyd_warshall(&g);
    let mut prev = floyd_warshall_matrix_form(&g, 1).unwrap();
    for passes in 2..=30 {
        let cur = floyd_warshall_matrix_form(&g, passes).unwrap();
        for ((c, p), f) in cur
            .matrix()
            .iter()
            .zip(prev.matrix().iter())
            .zip(full.matrix().iter())
        {
            assert!(c <= p && c >= f);
        }
        prev = cur;
    }
    assert_eq!(prev, full);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesic_distances_form_a_metric(seed in 0u64..100_000, n in 3usize..30, k in 1usize..5) {
        let pts = random_points(seed, n, 2);
        let d = pairwise_distances(&pts).unwrap();
        let g = floyd_warshall(&knn_graph(&d, k.min(n - 1)).unwrap());
        for i in 0..n {
            prop_assert_eq!(g.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(g.get(i, j), g.get(j, i));
                // Paths are chains of straight segments.
                prop_assert!(g.get(i, j) >= d.get(i, j) * (1.0 - 1e-12));
                for m in 0..n {
                    prop_assert!(g.get(i, j) <= g.get(i, m) + g.get(m, j) + 1e-12 * g.get(i, j).min(1e300));
                }
            }
        }
    }

    #[test]
    fn relabelling_points_permutes_geodesics(seed in 0u64..100_000, n in 3usize..25, shift in 1usize..24) {
        let pts = random_points(seed, n, 2);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let moved: Vec<Point> = perm.iter().map(|&i| pts[i].clone()).collect();
        let ga = floyd_warshall(&knn_graph(&pairwise_distances(&pts).unwrap(), 2).unwrap());
        let gb = floyd_warshall(&knn_graph(&pairwise_distances(&moved).unwrap(), 2).unwrap());
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (ga.get(perm[i], perm[j]), gb.get(i, j));
                prop_assert!(a == b || (a - b).abs() <= 1e-12 * a);
            }
        }
    }

    #[test]
    fn euclidean_matrix_is_symmetric_with_zero_diagonal(seed in 0u64..100_000, n in 1usize..20, dim in 1usize..6) {
        let pts = random_points(seed, n, dim);
        let d = pairwise_distances(&pts).unwrap();
        for i in 0..n {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                prop_assert_eq!(d.get(i, j), euclidean(pts[i].coords(), pts[j].coords()));
            }
        }
    }
}
