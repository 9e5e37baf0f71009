mod support;

use losnet_core::connectivity::{fiedler_pair, laplacian, pair_terms, ConstraintParams, LosMetric};
use losnet_core::geometry::{region_contains, Vec2};
use losnet_core::los::los_distance;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{connected, fiedler_oracle, random_weights, sample_inside, Scene};

fn dense(w: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(w.len(), w.len(), |i, j| w[i][j])
}

proptest! {
    #[test]
    fn fiedler_pair_matches_jacobi(seed in any::<u64>(), n in 2usize..9, density in 0.2f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_weights(&mut rng, n, density);
        let (lambda2, v2) = fiedler_pair(&laplacian(&dense(&w)).unwrap()).unwrap();
        if !connected(&w) {
            prop_assert_eq!(lambda2, 0.0);
            prop_assert!((v2.sum()).abs() < 1e-12 && (v2.norm() - 1.0).abs() < 1e-12);
            return Ok(());
        }
        let (l, v, gap) = fiedler_oracle(&w);
        prop_assert!(lambda2 > 0.0);
        prop_assert!((l - lambda2).abs() <= 1e-9);
        if gap > 1e-6 {
            for k in 0..n {
                prop_assert!((v[k] - v2[k]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = laplacian(&dense(&random_weights(&mut rng, n, 0.5))).unwrap();
        for i in 0..n {
            prop_assert!(l.row(i).sum().abs() < 1e-12);
        }
    }
}

#[test]
fn jacobi_oracle_diagonalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = random_weights(&mut rng, 9, 0.7);
    let l = support::laplacian_of(&w);
    let (values, vectors) = support::jacobi_eigen(&l);
    for (lambda, v) in values.iter().zip(&vectors) {
        for i in 0..9 {
            let lv: f64 = (0..9).map(|j| l[i][j] * v[j]).sum();
            assert!((lv - lambda * v[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn isolated_robot_gives_exact_zero() {
    let mut w = vec![vec![0.0; 4]; 4];
    for (i, j) in [(0, 1), (1, 2)] {
        w[i][j] = 0.7;
        w[j][i] = 0.7;
    }
    assert_eq!(fiedler_pair(&laplacian(&dense(&w)).unwrap()).unwrap().0, 0.0);
}

/// The weight gradient of a pair against central differences, with both
/// regions held fixed. Only points where robot i's directed clearance is
/// the shared one are compared, since only there is the exact term the
/// derivative.
#[test]
fn weight_gradient_matches_finite_differences() {
    const H: f64 = 1e-6;
    let p = ConstraintParams {
        d_com_max: 12.0,
        ..ConstraintParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut compared = 0;
    for seed in 0..30 {
        let scene_j = Scene::new(500 + seed);
        let region_j = scene_j.region(150.0, 1f64.to_radians()).with_robot_id(1);
        let local = sample_inside(&mut rng, region_j.vertices(), 1, |q| {
            region_contains(&region_j, q) && q.norm() > 0.5 && q.norm() < 11.5
        })[0];
        let q_i = scene_j.pose + local;
        let scene_i = Scene::at(scene_j.world.clone(), q_i);
        let region_i = scene_i.region(150.0, 1f64.to_radians());
        let weight = |q: Vec2| {
            pair_terms(q, &region_i, scene_j.pose, &region_j, &p, LosMetric::DLosApprox)
                .unwrap()
                .0
                .weight()
        };
        let (f, g, _) = pair_terms(q_i, &region_i, scene_j.pose, &region_j, &p, LosMetric::DLosApprox).unwrap();
        let d_ji = los_distance(&region_j, local).distance;
        let d_ij = los_distance(&region_i, -local).distance;
        if f.weight() == 0.0 || d_ji > d_ij - 1e-3 {
            continue;
        }
        let analytic = g.weight_gradient_exact(&f);
        let numeric = Vec2::new(
            (weight(q_i + Vec2::new(H, 0.0)) - weight(q_i - Vec2::new(H, 0.0))) / (2.0 * H),
            (weight(q_i + Vec2::new(0.0, H)) - weight(q_i - Vec2::new(0.0, H))) / (2.0 * H),
        );
        let err = (analytic - numeric).norm() / analytic.norm().max(1e-9);
        assert!(err <= 1e-4, "seed {seed}: {analytic:?} vs {numeric:?}");
        compared += 1;
    }
    assert!(compared >= 10, "only {compared} comparable configurations");
}
