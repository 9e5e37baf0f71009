use serde::{Deserialize, Serialize};

use super::{spherical_flip, FlipConfig, GeometryError, Polygon, Scan, Vec2};

/// Orientation tolerance of the hull construction; collinear points are
/// dropped.
const ORIENT_EPS: f64 = 1e-12;

/// Convex hull of a flipped scan, counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlippedHull {
    vertices: Vec<Vec2>,
    face_normals: Vec<Vec2>,
    origin_inside: bool,
}

impl FlippedHull {
    /// Builds a hull from counter-clockwise convex vertices.
    pub fn from_ccw_vertices(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::DegenerateHull(vertices.len()));
        }
        let n = vertices.len();
        let mut face_normals = Vec::with_capacity(n);
        let mut origin_inside = true;
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let e = b - a;
            let len = e.norm();
            if len == 0.0 {
                return Err(GeometryError::DegenerateHull(n));
            }
            face_normals.push(Vec2::new(e.y, -e.x) / len);
            if e.cross(-a) <= 0.0 {
                origin_inside = false;
            }
        }
        Ok(Self {
            vertices,
            face_normals,
            origin_inside,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn face_normals(&self) -> &[Vec2] {
        &self.face_normals
    }

    pub fn origin_inside(&self) -> bool {
        self.origin_inside
    }

    /// Number of faces (edges).
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, k: usize) -> (Vec2, Vec2) {
        (self.vertices[k], self.vertices[(k + 1) % self.vertices.len()])
    }

    pub fn as_polygon(&self) -> Polygon {
        Polygon::new(self.vertices.clone())
    }

    /// Signed offsets `n_k . (p - a_k)` of a flipped-space point from every
    /// face; all non-positive means `p` is inside or on the hull.
    pub fn face_offsets(&self, p: Vec2) -> impl Iterator<Item = f64> + '_ {
        self.vertices
            .iter()
            .zip(&self.face_normals)
            .map(move |(&a, &n)| n.dot(p - a))
    }

    /// Exact visibility metric: the largest face offset of `f(q)`. Positive
    /// exactly when `q` lies in the visible region.
    pub fn d_hull_max(&self, q: Vec2, r_flip: f64) -> Result<f64, GeometryError> {
        let f = spherical_flip(q, r_flip)?;
        Ok(self.face_offsets(f).fold(f64::NEG_INFINITY, f64::max))
    }

    /// Index of the face attaining [`Self::d_hull_max`].
    pub fn argmax_face(&self, q: Vec2, r_flip: f64) -> Result<usize, GeometryError> {
        let f = spherical_flip(q, r_flip)?;
        let mut best = (0, f64::NEG_INFINITY);
        for (k, d) in self.face_offsets(f).enumerate() {
            if d > best.1 {
                best = (k, d);
            }
        }
        Ok(best.0)
    }
}

/// Andrew's monotone chain. Returns the strictly convex hull in
/// counter-clockwise order starting from the lexicographically smallest point.
pub fn monotone_chain(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);
    let mut hull: Vec<Vec2> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= ORIENT_EPS {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= ORIENT_EPS {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Flips every scan point about the sphere of radius `cfg.r_flip` and takes
/// the convex hull of the result.
pub fn flipped_convex_hull(scan: &Scan, cfg: &FlipConfig) -> Result<FlippedHull, GeometryError> {
    cfg.validate()?;
    let max_range = scan
        .points()
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max);
    if cfg.r_flip <= max_range {
        return Err(GeometryError::FlipRadiusTooSmall {
            r_flip: cfg.r_flip,
            max_range,
        });
    }
    let flipped = scan
        .points()
        .iter()
        .map(|&p| spherical_flip(p, cfg.r_flip))
        .collect::<Result<Vec<_>, _>>()?;
    let hull = FlippedHull::from_ccw_vertices(monotone_chain(&flipped))?;
    if !hull.origin_inside {
        return Err(GeometryError::OriginOutsideHull);
    }
    Ok(hull)
}

/// Log-sum-exp relaxation of [`FlippedHull::d_hull_max`]:
/// `(1/alpha) log sum_k exp(alpha d_k)`, which overestimates the max by at
/// most `ln(K)/alpha`.
pub fn d_hull_logsumexp(hull: &FlippedHull, q: Vec2, r_flip: f64, lse_alpha: f64) -> Result<f64, GeometryError> {
    let f = spherical_flip(q, r_flip)?;
    let m = hull.face_offsets(f).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = hull.face_offsets(f).map(|d| (lse_alpha * (d - m)).exp()).sum();
    Ok(m + sum.ln() / lse_alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn polar(deg: f64, r: f64) -> Vec2 {
        Vec2::from_angle(deg.to_radians()) * r
    }

    fn cfg(r_flip: f64) -> FlipConfig {
        FlipConfig {
            r_flip,
            ..FlipConfig::default()
        }
    }

    #[test]
    fn cross_scan_gives_square_hull() {
        let scan = Scan::new((0..4).map(|k| polar(90.0 * k as f64, 1.0)).collect(), 1.0, 4).unwrap();
        let hull = flipped_convex_hull(&scan, &cfg(2.0)).unwrap();
        assert_eq!(hull.len(), 4);
        for want in [Vec2::new(3.0, 0.0), Vec2::new(0.0, 3.0), Vec2::new(-3.0, 0.0), Vec2::new(0.0, -3.0)] {
            assert!(hull.vertices().iter().any(|v| (*v - want).norm() < 1e-12));
        }
        assert!(hull.as_polygon().signed_area() > 0.0);
        assert!(hull.origin_inside());
    }

    #[test]
    fn ring_hull_has_uniform_radius() {
        let scan = Scan::ring(4.0, 360);
        let hull = flipped_convex_hull(&scan, &cfg(50.0)).unwrap();
        assert_eq!(hull.len(), 360);
        for v in hull.vertices() {
            assert!((v.norm() - 96.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_scan_hull_contains_every_flipped_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec2> = (0..100)
            .map(|k| polar(3.6 * k as f64 + rng.random_range(0.0..3.0), rng.random_range(0.5..30.0)))
            .collect();
        let scan = Scan::new(pts, 30.0, 100).unwrap();
        let c = cfg(150.0);
        let hull = flipped_convex_hull(&scan, &c).unwrap();
        let turns: Vec<f64> = (0..hull.len())
            .map(|k| {
                let (a, b) = hull.edge(k);
                let (_, c2) = hull.edge((k + 1) % hull.len());
                (b - a).cross(c2 - b)
            })
            .collect();
        assert!(turns.iter().all(|&t| t > 0.0));
        for &p in scan.points() {
            let f = spherical_flip(p, c.r_flip).unwrap();
            let worst = hull.face_offsets(f).fold(f64::NEG_INFINITY, f64::max);
            assert!(worst <= 1e-9, "flipped point {worst} outside hull");
        }
    }

    #[test]
    fn collinear_points_are_dropped() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        assert_eq!(monotone_chain(&pts).len(), 4);
        let line = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)];
        assert!(matches!(
            FlippedHull::from_ccw_vertices(monotone_chain(&line)),
            Err(GeometryError::DegenerateHull(_))
        ));
    }

    #[test]
    fn flip_radius_must_exceed_scan_range() {
        let scan = Scan::ring(30.0, 36);
        assert!(matches!(
            flipped_convex_hull(&scan, &cfg(20.0)),
            Err(GeometryError::FlipRadiusTooSmall { .. })
        ));
    }

    #[test]
    fn one_sided_scan_leaves_origin_outside() {
        let scan = Scan::new((0..10).map(|k| polar(10.0 * k as f64, 5.0)).collect(), 30.0, 36).unwrap();
        assert_eq!(
            flipped_convex_hull(&scan, &cfg(100.0)),
            Err(GeometryError::OriginOutsideHull)
        );
    }

    #[test]
    fn logsumexp_overestimates_max_by_at_most_ln_k_over_alpha() {
        let hull = FlippedHull::from_ccw_vertices(vec![
            Vec2::new(10.0, -10.0),
            Vec2::new(10.0, 10.0),
            Vec2::new(-10.0, 0.0),
        ])
        .unwrap();
        let q = Vec2::new(1.0, 0.0);
        let exact = hull.d_hull_max(q, 10.0).unwrap();
        for alpha in [1.0, 10.0, 100.0, 1000.0] {
            let lse = d_hull_logsumexp(&hull, q, 10.0, alpha).unwrap();
            assert!(lse >= exact - 1e-12);
            assert!(lse - exact <= (3f64).ln() / alpha + 1e-12);
        }
    }
}
