//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use losnet_core::connectivity::{ConnectivityState, EdgeFactors, PairGradient};
use losnet_core::geometry::{
    approx_visible_region, augment_scan, flipped_convex_hull, Aabb, FlipConfig, Scan, Vec2, VisibleRegionPolygon,
};
use nalgebra::DMatrix;
use losnet_core::sim::{clutter_world, raycast_lidar, ClutterSpec, WorldModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BEAMS: usize = 720;
pub const RANGE: f64 = 30.0;

/// Cyclic Jacobi rotations on a dense symmetric matrix. Returns eigenvalues
/// and eigenvectors (as columns) in ascending eigenvalue order.
pub fn jacobi_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = order.iter().map(|&k| v.iter().map(|row| row[k]).collect()).collect();
    (values, vectors)
}

/// Graph Laplacian of a dense weight matrix.
pub fn laplacian_of(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        (0..n).filter(|&k| k != i).map(|k| w[i][k]).sum()
                    } else {
                        -w[i][j]
                    }
                })
                .collect()
        })
        .collect()
}

/// Fiedler value, vector (first entry above 1e-12 in magnitude made
/// positive) and the gap to the next eigenvalue.
pub fn fiedler_oracle(w: &[Vec<f64>]) -> (f64, Vec<f64>, f64) {
    let (values, vectors) = jacobi_eigen(&laplacian_of(w));
    let mut v = vectors[1].clone();
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let gap = values.get(2).map_or(f64::INFINITY, |l3| l3 - values[1]);
    (values[1], v, gap)
}

/// Depth-first connectivity over positive weights.
pub fn connected(w: &[Vec<f64>]) -> bool {
    let n = w.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && w[i][j] > 0.0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Smallest total weight over every spanning tree of the graph, found by
/// trying each `(n - 1)`-subset of the edges. `None` if none spans.
pub fn min_spanning_weight(n: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        r
    }
    let need = n - 1;
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..need).collect();
    if edges.len() < need {
        return None;
    }
    loop {
        let mut parent: Vec<usize> = (0..n).collect();
        let mut acyclic = true;
        for &k in &pick {
            let (a, b) = (find(&mut parent, edges[k].0), find(&mut parent, edges[k].1));
            if a == b {
                acyclic = false;
                break;
            }
            parent[a] = b;
        }
        if acyclic {
            let total: f64 = pick.iter().map(|&k| edges[k].2).sum();
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
        // Next combination in lexicographic order.
        let mut i = need;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < edges.len() - need + i {
                break;
            }
            if i == 0 {
                return best;
            }
        }
        pick[i] += 1;
        for k in i + 1..need {
            pick[k] = pick[k - 1] + 1;
        }
    }
}

/// Randomly cluttered square world with a free disc around its center.
pub fn scene_world(seed: u64) -> WorldModel {
    let spec = ClutterSpec {
        bounds: Aabb::new(Vec2::new(0.0, 0.0), Vec2::new(50.0, 50.0)),
        obstacle_count: 45,
        min_radius: 0.5,
        max_radius: 2.5,
        min_gap: 0.6,
        keep_out: vec![(Vec2::new(25.0, 25.0), 1.5)],
    };
    clutter_world(&spec, seed)
}

/// One sensor sweep from the middle of a random world.
pub struct Scene {
    pub world: WorldModel,
    pub pose: Vec2,
    pub scan: Scan,
}

impl Scene {
    pub fn new(seed: u64) -> Self {
        let world = scene_world(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
        let pose = Vec2::new(25.0 + rng.random_range(-0.5..0.5), 25.0 + rng.random_range(-0.5..0.5));
        Scene::at(world, pose)
    }

    pub fn at(world: WorldModel, pose: Vec2) -> Self {
        let raw = raycast_lidar(&world, pose, BEAMS, RANGE, &[], 0.0).unwrap();
        let scan = augment_scan(&raw, 2.0 * raw.beam_pitch()).unwrap();
        Scene { world, pose, scan }
    }

    pub fn region(&self, r_flip: f64, delta_theta: f64) -> VisibleRegionPolygon {
        region_of(&self.scan, r_flip, delta_theta)
    }

    pub fn exact(&self, r_flip: f64) -> ExactRegion {
        ExactRegion::new(self.scan.points(), r_flip)
    }
}

pub fn region_of(scan: &Scan, r_flip: f64, delta_theta: f64) -> VisibleRegionPolygon {
    let cfg = FlipConfig {
        r_flip,
        delta_theta,
        ..FlipConfig::default()
    };
    let hull = flipped_convex_hull(scan, &cfg).unwrap();
    approx_visible_region(&hull, &cfg).unwrap()
}

/// Uniform samples inside `inside`, drawn from the box around `around`.
pub fn sample_inside(
    rng: &mut ChaCha8Rng,
    around: &[Vec2],
    count: usize,
    inside: impl Fn(Vec2) -> bool,
) -> Vec<Vec2> {
    let (mut lo, mut hi) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
    for p in around {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q = Vec2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if inside(q) {
            out.push(q);
        }
    }
    out
}

fn flip(p: Vec2, r: f64) -> Vec2 {
    p * (2.0 * r / p.norm() - 1.0)
}

/// Exact visible region of a scan: the points whose flip lies strictly
/// outside the convex hull of the flipped scan. The hull here comes from a
/// gift-wrapping pass, not from the library.
pub struct ExactRegion {
    pub r_flip: f64,
    /// Counter-clockwise hull of the flipped points.
    pub hull: Vec<Vec2>,
}

impl ExactRegion {
    pub fn new(points: &[Vec2], r_flip: f64) -> Self {
        let pts: Vec<Vec2> = points.iter().map(|&p| flip(p, r_flip)).collect();
        let start = (0..pts.len())
            .min_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(pts[a].y.total_cmp(&pts[b].y)))
            .unwrap();
        let mut hull = Vec::new();
        let mut cur = start;
        loop {
            hull.push(pts[cur]);
            let mut next = (cur + 1) % pts.len();
            for k in 0..pts.len() {
                if k == cur {
                    continue;
                }
                let turn = (pts[next] - pts[cur]).cross(pts[k] - pts[cur]);
                let farther = pts[k].distance(pts[cur]) > pts[next].distance(pts[cur]);
                if turn < 0.0 || (turn == 0.0 && farther) {
                    next = k;
                }
            }
            cur = next;
            if cur == start || hull.len() > pts.len() {
                break;
            }
        }
        ExactRegion { r_flip, hull }
    }

    /// Strictly inside the region: flipped point beyond some hull face.
    pub fn contains(&self, q: Vec2) -> bool {
        if q == Vec2::ZERO {
            return true;
        }
        if q.norm() >= 2.0 * self.r_flip {
            return false;
        }
        let f = flip(q, self.r_flip);
        let n = self.hull.len();
        (0..n).any(|k| (self.hull[(k + 1) % n] - self.hull[k]).cross(f - self.hull[k]) < 0.0)
    }

    fn boundary_point(&self, k: usize, t: f64) -> Vec2 {
        let n = self.hull.len();
        let (a, b) = (self.hull[k], self.hull[(k + 1) % n]);
        flip(a + (b - a) * t, self.r_flip)
    }

    /// Distance from `q` to the region boundary.
    ///
    /// Each boundary piece is first sampled coarsely; a piece is refined
    /// only while its coarse minimum, less the widest gap between its
    /// samples, could still beat the best distance found.
    pub fn boundary_distance(&self, q: Vec2) -> f64 {
        const COARSE: usize = 32;
        const FINE: usize = 2048;
        let n = self.hull.len();
        let mut bounds: Vec<(f64, usize)> = (0..n)
            .map(|k| {
                let pts: Vec<Vec2> = (0..=COARSE)
                    .map(|s| self.boundary_point(k, s as f64 / COARSE as f64))
                    .collect();
                let near = pts.iter().map(|p| p.distance(q)).fold(f64::INFINITY, f64::min);
                let gap = pts.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, f64::max);
                (near - gap, k)
            })
            .collect();
        bounds.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = f64::INFINITY;
        for (lower, k) in bounds {
            if lower > best {
                break;
            }
            let dist = |t: f64| self.boundary_point(k, t).distance(q);
            let (mut s_best, mut d_best) = (0, f64::INFINITY);
            for s in 0..=FINE {
                let d = dist(s as f64 / FINE as f64);
                if d < d_best {
                    (s_best, d_best) = (s, d);
                }
            }
            let (mut lo, mut hi) = (
                s_best.saturating_sub(1) as f64 / FINE as f64,
                (s_best + 1).min(FINE) as f64 / FINE as f64,
            );
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..60 {
                let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
                if dist(x1) < dist(x2) {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            best = best.min(d_best).min(dist(0.5 * (lo + hi)));
        }
        best
    }
}

/// Random weighted graph on `n` vertices. Each pair is an edge with
/// probability `density`.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                let x = rng.random_range(0.01..1.0);
                w[i][j] = x;
                w[j][i] = x;
            }
        }
    }
    w
}

/// Connected team state built straight from random factors. Pairs that are
/// not links get `gamma = 1` unless `safety` makes them close calls.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, safety: f64) -> ConnectivityState {
    let mut weights = DMatrix::zeros(n, n);
    let mut factors = vec![EdgeFactors::default(); n * n];
    loop {
        for i in 0..n {
            for j in i + 1..n {
                let gamma = if rng.random_bool(safety) { rng.random_range(0.05..0.95) } else { 1.0 };
                let f = if rng.random_bool(0.6) {
                    EdgeFactors {
                        alpha: rng.random_range(0.05..=1.0),
                        beta: rng.random_range(0.05..=1.0),
                        gamma,
                        distance: rng.random_range(1.0..15.0),
                        los_distance: 1.0,
                    }
                } else {
                    EdgeFactors {
                        gamma,
                        ..EdgeFactors::default()
                    }
                };
                factors[i * n + j] = f;
                factors[j * n + i] = f;
                weights[(i, j)] = f.weight();
                weights[(j, i)] = f.weight();
            }
        }
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| weights[(i, j)]).collect()).collect();
        if connected(&rows) {
            break;
        }
    }
    ConnectivityState::from_parts(weights, factors, vec![PairGradient::default(); n * n], vec![Vec2::ZERO; n * n])
        .unwrap()
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}
