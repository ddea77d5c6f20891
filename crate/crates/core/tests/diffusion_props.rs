mod common;

use common::rng;
use heatreg::datasets::Point;
use heatreg::diffusion::{
    gaussian_kernel_matrix, propagate, propagate_with, transition_matrix, PropagationState,
};
use heatreg::metricspace::{floyd_warshall, knn_graph, pairwise_distances};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn points(seed: u64, n: usize) -> Vec<Point> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| Point::new(vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transition_rows_are_stochastic_and_contractive(
        seed in 0u64..100_000,
        n in 2usize..40,
        eps in 0.01f64..5.0,
        geodesic in any::<bool>(),
    ) {
        let d = pairwise_distances(&points(seed, n)).unwrap();
        let d = if geodesic { floyd_warshall(&knn_graph(&d, 2.min(n - 1)).unwrap()) } else { d };
        let p = transition_matrix(&gaussian_kernel_matrix(&d, eps).unwrap()).unwrap();
        for row in p.matrix().row_iter() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
            prop_assert!(row.iter().all(|&v| v >= 0.0));
        }
        let mut r = rng(seed ^ 0x55);
        for _ in 0..10 {
            let v = DVector::from_fn(n, |_, _| r.random_range(-3.0..3.0));
            prop_assert!(p.apply(&v).amax() <= v.amax() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn clamped_entries_never_move(seed in 0u64..100_000, n in 3usize..30, steps in 0usize..12) {
        let d = pairwise_distances(&points(seed, n)).unwrap();
        let p = transition_matrix(&gaussian_kernel_matrix(&d, 0.3).unwrap()).unwrap();
        let idx = vec![0, n - 1];
        let vals = vec![1.0, -1.0];
        let mut state = PropagationState::new(n, idx.clone(), vals.clone()).unwrap();
        propagate_with(&p, &mut state, steps, |s| {
            assert_eq!(s.values()[0], 1.0);
            assert_eq!(s.values()[n - 1], -1.0);
        }).unwrap();
        prop_assert_eq!(state.t(), steps);
        // Max principle with clamps at +-1: values stay in [-1, 1].
        prop_assert!(state.values().iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn propagation_is_additive_in_steps(seed in 0u64..100_000, n in 3usize..20, a in 0usize..5, b in 0usize..5) {
        let d = pairwise_distances(&points(seed, n)).unwrap();
        let p = transition_matrix(&gaussian_kernel_matrix(&d, 0.5).unwrap()).unwrap();
        let s0 = PropagationState::new(n, vec![1], vec![1.0]).unwrap();
        let once = propagate(&p, &s0, a + b).unwrap();
        let twice = propagate(&p, &propagate(&p, &s0, a).unwrap(), b).unwrap();
        prop_assert_eq!(once, twice);
    }
}
