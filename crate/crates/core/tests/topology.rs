mod support;

use losnet_core::connectivity::{fiedler_pair, laplacian};
use losnet_core::topology::{apply_mask, kruskal_mst, mask_weights, plan_topology};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{min_spanning_weight, random_state};

proptest! {
    #[test]
    fn kruskal_weight_is_minimal(
        n in 2usize..7,
        present in prop::collection::vec(any::<bool>(), 15),
        weights in prop::collection::vec(-1.0f64..2.0, 15),
    ) {
        let mut edges = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if present[k] {
                    edges.push((i, j, weights[k]));
                }
                k += 1;
            }
        }
        let forest = kruskal_mst(&edges, n).unwrap();
        match min_spanning_weight(n, &edges) {
            Some(best) => {
                prop_assert!(!forest.partial);
                prop_assert!((forest.total_weight() - best).abs() <= 1e-12);
            }
            None => prop_assert!(forest.partial),
        }
    }

    #[test]
    fn masking_keeps_tree_weights_and_safety_terms(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(&mut rng, n, 0.3);
        let plan = plan_topology(&state, 15.0).unwrap();
        prop_assert_eq!(plan.tree.edges.len(), n - 1);
        for i in 0..n {
            for j in 0..n {
                let m = plan.masked_weights[(i, j)];
                if i == j {
                    prop_assert_eq!(m, 0.0);
                } else if plan.tree.contains(i, j) {
                    prop_assert_eq!(m, state.weight(i, j));
                } else {
                    let gamma = state.factors(i, j).gamma;
                    prop_assert_eq!(m, if gamma < 1.0 { gamma } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn masking_is_idempotent(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(&mut rng, n, 0.0);
        let tree = plan_topology(&state, 15.0).unwrap().tree.edges;
        let once = apply_mask(&state, &tree).unwrap();
        let twice = mask_weights(&once, &tree).unwrap();
        prop_assert_eq!(once.weights(), &twice);
    }

    #[test]
    fn every_tree_edge_is_load_bearing(seed in any::<u64>(), n in 2usize..11) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(&mut rng, n, 0.0);
        let plan = plan_topology(&state, 15.0).unwrap();
        let (lambda2, _) = fiedler_pair(&laplacian(&plan.masked_weights).unwrap()).unwrap();
        prop_assert!(lambda2 > 1e-9);
        for &(i, j) in &plan.tree.edges {
            let mut cut = plan.masked_weights.clone();
            cut[(i, j)] = 0.0;
            cut[(j, i)] = 0.0;
            prop_assert_eq!(fiedler_pair(&laplacian(&cut).unwrap()).unwrap().0, 0.0);
        }
    }
}

#[test]
fn disconnected_candidates_give_a_partial_forest() {
    let forest = kruskal_mst(&[(0, 1, 0.5), (2, 3, 0.1)], 4).unwrap();
    assert!(forest.partial);
    assert_eq!(forest.edges, vec![(2, 3), (0, 1)]);
}
