use serde::{Deserialize, Serialize};

use super::{spherical_flip, FlipConfig, FlippedHull, GeometryError, Polygon, Vec2};

/// Polygonal inner approximation of a robot's visible region, in the robot's
/// local frame (sensor at the origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleRegionPolygon {
    polygon: Polygon,
    source_hull: FlippedHull,
    config: FlipConfig,
    robot_id: usize,
}

impl VisibleRegionPolygon {
    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn vertices(&self) -> &[Vec2] {
        self.polygon.vertices()
    }

    pub fn source_hull(&self) -> &FlippedHull {
        &self.source_hull
    }

    pub fn r_flip(&self) -> f64 {
        self.config.r_flip
    }

    pub fn config(&self) -> &FlipConfig {
        &self.config
    }

    pub fn robot_id(&self) -> usize {
        self.robot_id
    }

    pub fn with_robot_id(mut self, robot_id: usize) -> Self {
        self.robot_id = robot_id;
        self
    }

    /// Exact visibility test against the true region the polygon approximates.
    pub fn truly_visible(&self, q: Vec2) -> bool {
        q == Vec2::ZERO
            || self
                .source_hull
                .d_hull_max(q, self.config.r_flip)
                .is_ok_and(|d| d > 0.0)
    }
}

/// Refines the hull boundary so that no piece spans a bearing wider than
/// `cfg.delta_theta`, then flips every vertex back into the sensor frame.
///
/// An edge spanning bearing `theta` is cut into `ceil(theta / delta_theta)`
/// pieces of equal bearing; the new vertices sit where the dividing rays
/// cross the straight hull edge.
pub fn approx_visible_region(hull: &FlippedHull, cfg: &FlipConfig) -> Result<VisibleRegionPolygon, GeometryError> {
    cfg.validate()?;
    if !hull.origin_inside() {
        return Err(GeometryError::OriginOutsideHull);
    }
    let mut refined = Vec::with_capacity(hull.len());
    for k in 0..hull.len() {
        let (a, b) = hull.edge(k);
        refined.push(a);
        let theta = a.cross(b).atan2(a.dot(b));
        let pieces = (theta / cfg.delta_theta - 1e-9).ceil().max(1.0) as usize;
        if pieces > 1 {
            let edge = b - a;
            let a_dir = a / a.norm();
            let step = theta / pieces as f64;
            for m in 1..pieces {
                let ray = a_dir.rotate(step * m as f64);
                let t = -ray.cross(a) / ray.cross(edge);
                refined.push(a + edge * t);
            }
        }
    }
    let vertices = refined
        .into_iter()
        .map(|v| spherical_flip(v, cfg.r_flip))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VisibleRegionPolygon {
        polygon: Polygon::new(vertices),
        source_hull: hull.clone(),
        config: *cfg,
        robot_id: 0,
    })
}

/// Strict point-in-region test. The sensor origin is always inside; points
/// within about 1e-9 m of the boundary may report either value.
pub fn region_contains(region: &VisibleRegionPolygon, q: Vec2) -> bool {
    q == Vec2::ZERO || region.polygon.contains(q)
}
