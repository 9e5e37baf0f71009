use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::{monotone_chain, point_segment_distance, segments_intersect, Aabb, Polygon, Scan, Vec2};

/// Static environment: obstacle polygons in the global frame, the working
/// area, and the target points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    pub obstacles: Vec<Polygon>,
    pub bounds: Aabb,
    #[serde(default)]
    pub targets: Vec<Vec2>,
}

impl WorldModel {
    pub fn empty(bounds: Aabb) -> Self {
        Self {
            obstacles: Vec::new(),
            bounds,
            targets: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (k, poly) in self.obstacles.iter().enumerate() {
            if poly.len() < 3 || !poly.is_simple() {
                return Err(SimError::BadObstacle(k));
            }
        }
        for (m, &t) in self.targets.iter().enumerate() {
            if self.inside_obstacle(t) {
                return Err(SimError::TargetInObstacle(m));
            }
        }
        Ok(())
    }

    pub fn inside_obstacle(&self, p: Vec2) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Distance from `p` to the nearest obstacle boundary, negated when `p`
    /// is inside an obstacle. Infinite in an empty world.
    pub fn clearance(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for o in &self.obstacles {
            let d = o.boundary_distance(p);
            if o.contains(p) {
                return -d;
            }
            best = best.min(d);
        }
        best
    }

    /// Whether the closed segment `[a, b]` avoids every obstacle.
    pub fn line_of_sight(&self, a: Vec2, b: Vec2) -> bool {
        !self.inside_obstacle(a)
            && !self.inside_obstacle(b)
            && self
                .obstacles
                .iter()
                .all(|o| o.edges().all(|(c, d)| !segments_intersect(a, b, c, d)))
    }

    /// Smallest distance between the segment `[a, b]` and any obstacle.
    pub fn segment_clearance(&self, a: Vec2, b: Vec2) -> f64 {
        if !self.line_of_sight(a, b) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for o in &self.obstacles {
            for (c, d) in o.edges() {
                let dist = point_segment_distance(a, c, d)
                    .min(point_segment_distance(b, c, d))
                    .min(point_segment_distance(c, a, b))
                    .min(point_segment_distance(d, a, b));
                best = best.min(dist);
            }
        }
        best
    }
}

fn bounding_circle(poly: &Polygon) -> (Vec2, f64) {
    let n = poly.len() as f64;
    let c = poly.vertices().iter().fold(Vec2::ZERO, |acc, &v| acc + v) / n;
    let r = poly.vertices().iter().map(|v| v.distance(c)).fold(0.0, f64::max);
    (c, r)
}

/// Distance along the ray `origin + t dir` to the segment `[a, b]`.
fn ray_segment(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let w = a - origin;
    let t = w.cross(e) / denom;
    let s = w.cross(dir) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Distance along the ray to a disc, if the ray enters it.
fn ray_disc(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let w = center - origin;
    let along = w.dot(dir);
    let perp_sq = w.norm_sq() - along * along;
    let r_sq = radius * radius;
    if perp_sq > r_sq {
        return None;
    }
    let t = along - (r_sq - perp_sq).sqrt();
    (t >= 0.0).then_some(t)
}

/// Beam indices whose bearing can touch a circle of radius `r` centred `c`
/// away from the sensor.
fn beam_window(c: Vec2, r: f64, beams: usize) -> Box<dyn Iterator<Item = usize>> {
    let dist = c.norm();
    if dist <= r {
        return Box::new(0..beams);
    }
    let pitch = TAU / beams as f64;
    let half = (r / dist).asin();
    let center = c.angle();
    let lo = ((center - half) / pitch).floor() as i64;
    let hi = ((center + half) / pitch).ceil() as i64;
    let n = beams as i64;
    let span = (hi - lo + 1).min(n);
    Box::new((lo..lo + span).map(move |m| m.rem_euclid(n) as usize))
}

/// Simulated 360-degree LiDAR sweep from `pose`: `beam_count` evenly spaced
/// bearings starting at zero, each returning the nearest hit on an obstacle
/// or on one of the `robots` discs, or nothing beyond `range`. Points are in
/// the sensor frame.
pub fn raycast_lidar(
    world: &WorldModel,
    pose: Vec2,
    beam_count: usize,
    range: f64,
    robots: &[Vec2],
    robot_radius: f64,
) -> Result<Scan, SimError> {
    if world.inside_obstacle(pose) {
        return Err(SimError::PoseInObstacle(pose));
    }
    let pitch = TAU / beam_count as f64;
    let dirs: Vec<Vec2> = (0..beam_count).map(|k| Vec2::from_angle(pitch * k as f64)).collect();
    let mut hits = vec![f64::INFINITY; beam_count];
    for o in &world.obstacles {
        let (c, r) = bounding_circle(o);
        let rel = c - pose;
        if rel.norm() - r > range {
            continue;
        }
        for k in beam_window(rel, r, beam_count) {
            for (a, b) in o.edges() {
                if let Some(t) = ray_segment(pose, dirs[k], a, b) {
                    hits[k] = hits[k].min(t);
                }
            }
        }
    }
    for &c in robots {
        let rel = c - pose;
        if rel.norm() - robot_radius > range || rel.norm() <= robot_radius {
            continue;
        }
        for k in beam_window(rel, robot_radius, beam_count) {
            if let Some(t) = ray_disc(pose, dirs[k], c, robot_radius) {
                hits[k] = hits[k].min(t);
            }
        }
    }
    let points = hits
        .iter()
        .zip(&dirs)
        .filter(|(&t, _)| t > 0.0 && t <= range)
        .map(|(&t, &d)| d * t)
        .collect();
    Ok(Scan::new(points, range, beam_count)?)
}

/// Parameters of the random clutter generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClutterSpec {
    pub bounds: Aabb,
    pub obstacle_count: usize,
    /// Outer radius range of each obstacle, meters.
    pub min_radius: f64,
    pub max_radius: f64,
    /// Smallest free gap between any two obstacles.
    pub min_gap: f64,
    /// Discs that must stay free of obstacles (start area, targets).
    #[serde(default)]
    pub keep_out: Vec<(Vec2, f64)>,
}

/// Scatters small random convex obstacles over the area. Obstacles that
/// cannot be placed within a bounded number of attempts are skipped.
pub fn clutter_world(spec: &ClutterSpec, seed: u64) -> WorldModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<(Vec2, f64)> = Vec::new();
    let mut obstacles = Vec::new();
    let b = spec.bounds;
    for _ in 0..spec.obstacle_count {
        for _attempt in 0..200 {
            let radius = rng.random_range(spec.min_radius..=spec.max_radius);
            let c = Vec2::new(
                rng.random_range(b.min.x + radius..b.max.x - radius),
                rng.random_range(b.min.y + radius..b.max.y - radius),
            );
            let clear_of_others = placed.iter().all(|&(p, r)| p.distance(c) >= r + radius + spec.min_gap);
            let clear_of_zones = spec.keep_out.iter().all(|&(p, r)| p.distance(c) >= r + radius);
            if !(clear_of_others && clear_of_zones) {
                continue;
            }
            let sides = rng.random_range(5..=8);
            let pts: Vec<Vec2> = (0..sides)
                .map(|_| Vec2::from_angle(rng.random_range(0.0..TAU)) * rng.random_range(0.6 * radius..=radius) + c)
                .collect();
            let hull = monotone_chain(&pts);
            if hull.len() < 3 {
                continue;
            }
            placed.push((c, radius));
            obstacles.push(Polygon::new(hull));
            break;
        }
    }
    WorldModel {
        obstacles,
        bounds: b,
        targets: Vec::new(),
    }
}

/// Occupancy grid over the world bounds for shortest-path waypoints.
#[derive(Debug, Clone)]
pub struct GridPlanner {
    origin: Vec2,
    resolution: f64,
    cols: usize,
    rows: usize,
    free: Vec<bool>,
}

impl GridPlanner {
    /// Cells whose centre is closer than `inflation` to an obstacle are
    /// blocked.
    pub fn new(world: &WorldModel, resolution: f64, inflation: f64) -> Self {
        let b = world.bounds;
        let cols = (b.width() / resolution).ceil().max(1.0) as usize;
        let rows = (b.height() / resolution).ceil().max(1.0) as usize;
        let mut free = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let p = b.min + Vec2::new((c as f64 + 0.5) * resolution, (r as f64 + 0.5) * resolution);
                free.push(world.clearance(p) >= inflation);
            }
        }
        Self {
            origin: b.min,
            resolution,
            cols,
            rows,
            free,
        }
    }

    fn cell(&self, p: Vec2) -> (usize, usize) {
        let c = ((p.x - self.origin.x) / self.resolution).floor();
        let r = ((p.y - self.origin.y) / self.resolution).floor();
        (
            (c.max(0.0) as usize).min(self.cols - 1),
            (r.max(0.0) as usize).min(self.rows - 1),
        )
    }

    fn center(&self, (c, r): (usize, usize)) -> Vec2 {
        self.origin + Vec2::new((c as f64 + 0.5) * self.resolution, (r as f64 + 0.5) * self.resolution)
    }

    fn is_free(&self, (c, r): (usize, usize)) -> bool {
        self.free[r * self.cols + c]
    }

    /// Shortest 8-connected path from `from` to `to`, as cell centres
    /// followed by `to` itself. The start and goal cells count as free.
    pub fn plan(&self, from: Vec2, to: Vec2) -> Option<Vec<Vec2>> {
        const STRAIGHT: u64 = 1000;
        const DIAGONAL: u64 = 1414;
        let start = self.cell(from);
        let goal = self.cell(to);
        let (cols, rows) = (self.cols as i64, self.rows as i64);
        let passable = |n: (usize, usize)| n == start || n == goal || self.is_free(n);
        let (path, _) = pathfinding::prelude::astar(
            &start,
            |&(c, r)| {
                let mut next = Vec::with_capacity(8);
                for (dc, dr) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                    let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                    if nc < 0 || nr < 0 || nc >= cols || nr >= rows {
                        continue;
                    }
                    let n = (nc as usize, nr as usize);
                    let diagonal = dc != 0 && dr != 0;
                    if !passable(n) || (diagonal && !(passable((nc as usize, r)) && passable((c, nr as usize)))) {
                        continue;
                    }
                    next.push((n, if diagonal { DIAGONAL } else { STRAIGHT }));
                }
                next
            },
            |&(c, r)| {
                let dx = c.abs_diff(goal.0) as u64;
                let dy = r.abs_diff(goal.1) as u64;
                STRAIGHT * dx.max(dy) + (DIAGONAL - STRAIGHT) * dx.min(dy)
            },
            |&n| n == goal,
        )?;
        let mut out: Vec<Vec2> = path.into_iter().map(|n| self.center(n)).collect();
        out.push(to);
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64, half: f64) -> Polygon {
        Polygon::new(vec![
            Vec2::new(x - half, y - half),
            Vec2::new(x + half, y - half),
            Vec2::new(x + half, y + half),
            Vec2::new(x - half, y + half),
        ])
    }

    fn bounds() -> Aabb {
        Aabb::new(Vec2::new(-20.0, -20.0), Vec2::new(20.0, 20.0))
    }

    #[test]
    fn empty_world_gives_no_returns() {
        let scan = raycast_lidar(&WorldModel::empty(bounds()), Vec2::ZERO, 720, 30.0, &[], 0.1).unwrap();
        assert!(scan.is_empty());
    }

    #[test]
    fn square_face_five_meters_ahead() {
        let mut world = WorldModel::empty(bounds());
        world.obstacles.push(square(5.5, 0.0, 0.5));
        let scan = raycast_lidar(&world, Vec2::ZERO, 720, 30.0, &[], 0.1).unwrap();
        let ahead = scan.points().iter().find(|p| p.y.abs() < 1e-12 && p.x > 0.0).unwrap();
        assert!((ahead.x - 5.0).abs() < 1e-12);
    }

    #[test]
    fn robots_block_beams() {
        let world = WorldModel::empty(bounds());
        let scan = raycast_lidar(&world, Vec2::ZERO, 720, 30.0, &[Vec2::new(0.0, 3.0)], 0.2).unwrap();
        let up = scan.points().iter().find(|p| p.x.abs() < 1e-12 && p.y > 0.0).unwrap();
        assert!((up.y - 2.8).abs() < 1e-12);
        assert!(scan.points().iter().all(|p| (p.distance(Vec2::new(0.0, 3.0)) - 0.2).abs() < 1e-9));
    }

    #[test]
    fn pose_inside_obstacle_is_an_error() {
        let mut world = WorldModel::empty(bounds());
        world.obstacles.push(square(0.0, 0.0, 1.0));
        assert!(matches!(
            raycast_lidar(&world, Vec2::ZERO, 360, 30.0, &[], 0.1),
            Err(SimError::PoseInObstacle(_))
        ));
    }

    #[test]
    fn clearance_and_sight() {
        let mut world = WorldModel::empty(bounds());
        world.obstacles.push(square(0.0, 0.0, 1.0));
        assert!((world.clearance(Vec2::new(3.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!(world.clearance(Vec2::new(0.5, 0.0)) < 0.0);
        assert!(!world.line_of_sight(Vec2::new(-3.0, 0.0), Vec2::new(3.0, 0.0)));
        assert!(world.line_of_sight(Vec2::new(-3.0, 2.0), Vec2::new(3.0, 2.0)));
        assert!((world.segment_clearance(Vec2::new(-3.0, 2.0), Vec2::new(3.0, 2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_buried_targets() {
        let mut world = WorldModel::empty(bounds());
        world.obstacles.push(square(0.0, 0.0, 1.0));
        world.targets.push(Vec2::new(0.2, 0.2));
        assert_eq!(world.validate(), Err(SimError::TargetInObstacle(0)));
    }

    #[test]
    fn clutter_respects_gaps_and_keep_out() {
        let spec = ClutterSpec {
            bounds: Aabb::new(Vec2::ZERO, Vec2::new(30.0, 20.0)),
            obstacle_count: 25,
            min_radius: 0.4,
            max_radius: 1.0,
            min_gap: 1.5,
            keep_out: vec![(Vec2::new(3.0, 10.0), 3.0)],
        };
        let world = clutter_world(&spec, 4);
        assert!(world.obstacles.len() > 10);
        assert!(world.validate().is_ok());
        assert!(world.clearance(Vec2::new(3.0, 10.0)) >= 3.0 - 1e-9);
        assert_eq!(clutter_world(&spec, 4), world);
    }

    #[test]
    fn planner_routes_around_a_wall() {
        let mut world = WorldModel::empty(Aabb::new(Vec2::ZERO, Vec2::new(20.0, 10.0)));
        world.obstacles.push(Polygon::new(vec![
            Vec2::new(9.0, 0.0),
            Vec2::new(11.0, 0.0),
            Vec2::new(11.0, 8.0),
            Vec2::new(9.0, 8.0),
        ]));
        let planner = GridPlanner::new(&world, 0.25, 0.5);
        let path = planner.plan(Vec2::new(2.0, 2.0), Vec2::new(18.0, 2.0)).unwrap();
        assert!(path.iter().any(|p| p.y > 8.0));
        for w in path.windows(2) {
            assert!(world.line_of_sight(w[0], w[1]));
        }
    }
}
