//! Visible-region construction from egocentric 2D scans.
//!
//! A scan is pushed outward by spherical flipping, wrapped in a convex hull,
//! and the hull boundary (refined so no edge spans too wide a bearing) is
//! flipped back to give a star-shaped polygon around the sensor. Every point
//! of that polygon is visible from the sensor.

mod hull;
mod polygon;
mod region;
mod scan;
mod vec2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hull::{d_hull_logsumexp, flipped_convex_hull, monotone_chain, FlippedHull};
pub use polygon::{point_segment_distance, segments_intersect, Aabb, Polygon};
pub use region::{approx_visible_region, region_contains, VisibleRegionPolygon};
pub use scan::{augment_scan, Scan};
pub use vec2::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("spherical flip is undefined at the origin")]
    DegenerateDirection,
    #[error("scan is empty")]
    EmptyScan,
    #[error("scan point {index} has range {range} outside (0, {max_range}]")]
    PointOutOfRange {
        index: usize,
        range: f64,
        max_range: f64,
    },
    #[error("flip radius {r_flip} must exceed the largest scan range {max_range}")]
    FlipRadiusTooSmall { r_flip: f64, max_range: f64 },
    #[error("invalid flip configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("convex hull is degenerate ({0} vertices)")]
    DegenerateHull(usize),
    #[error("sensor origin is not strictly inside the flipped hull")]
    OriginOutsideHull,
}

/// Spherical flipping `q -> 2 r q/|q| - q`.
///
/// Maps the ray through `q` onto itself with `|f(q)| = 2 r - |q|`, so it is
/// an involution on `0 < |q| < 2 r`.
pub fn spherical_flip(q: Vec2, r_flip: f64) -> Result<Vec2, GeometryError> {
    let n = q.norm();
    if n == 0.0 {
        return Err(GeometryError::DegenerateDirection);
    }
    Ok(q * (2.0 * r_flip / n - 1.0))
}

/// Parameters of visible-region construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlipConfig {
    /// Flipping radius in meters.
    pub r_flip: f64,
    /// Sharpness of the log-sum-exp relaxation of the hull metric.
    pub lse_alpha: f64,
    /// Largest bearing, in radians, that one region edge may span.
    pub delta_theta: f64,
}

impl Default for FlipConfig {
    fn default() -> Self {
        Self {
            r_flip: 150.0,
            lse_alpha: 10.0,
            delta_theta: 1f64.to_radians(),
        }
    }
}

impl FlipConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.r_flip > 0.0 && self.r_flip.is_finite()) {
            return Err(GeometryError::InvalidConfig("r_flip must be positive"));
        }
        if !(self.lse_alpha > 0.0) {
            return Err(GeometryError::InvalidConfig("lse_alpha must be positive"));
        }
        if !(self.delta_theta > 0.0 && self.delta_theta < std::f64::consts::PI) {
            return Err(GeometryError::InvalidConfig("delta_theta must lie in (0, pi)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flip_examples() {
        assert_eq!(spherical_flip(Vec2::new(1.0, 0.0), 2.0).unwrap(), Vec2::new(3.0, 0.0));
        assert_eq!(spherical_flip(Vec2::new(0.0, 3.0), 3.0).unwrap(), Vec2::new(0.0, 3.0));
        let q = Vec2::new(1.0, 1.0);
        let back = spherical_flip(spherical_flip(q, 5.0).unwrap(), 5.0).unwrap();
        assert!((back - q).norm() < 1e-14);
    }

    #[test]
    fn flip_of_origin_is_an_error() {
        assert_eq!(
            spherical_flip(Vec2::ZERO, 1.0),
            Err(GeometryError::DegenerateDirection)
        );
    }

    #[test]
    fn config_validation() {
        assert!(FlipConfig::default().validate().is_ok());
        let bad = FlipConfig {
            delta_theta: 4.0,
            ..FlipConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn flip_is_an_involution(r in 0.5f64..1000.0, frac in 1e-3f64..1.999, angle in -3.2f64..3.2) {
            let q = Vec2::from_angle(angle) * (frac * r);
            let back = spherical_flip(spherical_flip(q, r).unwrap(), r).unwrap();
            prop_assert!((back - q).norm() <= 1e-12 * q.norm().max(1.0) * 4.0);
        }

        #[test]
        fn flip_radius_is_mirrored(r in 0.5f64..1000.0, frac in 1e-3f64..1.999, angle in -3.2f64..3.2) {
            let q = Vec2::from_angle(angle) * (frac * r);
            let f = spherical_flip(q, r).unwrap();
            prop_assert!((f.norm() - (2.0 * r - q.norm())).abs() <= 1e-12 * r * 4.0);
            prop_assert!(f.cross(q).abs() <= 1e-9 * r * r);
            prop_assert!(f.dot(q) > 0.0);
        }
    }
}
