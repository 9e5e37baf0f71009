//! Line-of-sight distance to a neighbor's visible region.
//!
//! The approximated distance is the distance to the nearest edge of the
//! region polygon. Because the polygon sits inside the true region, this is
//! a lower bound on the distance to the true region boundary, which is what
//! makes it safe to build LoS constraints on.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    region_contains, spherical_flip, FlippedHull, GeometryError, Polygon, Vec2, VisibleRegionPolygon,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LosError {
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("gradient is undefined on the segment itself")]
    UndefinedGradient,
    #[error("query position coincides with the region's origin")]
    DegeneratePosition,
    #[error("query point lies outside the visible region")]
    OutsideRegion,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which piece of the segment is closest to the query point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentBranch {
    StartVertex,
    EndVertex,
    Interior,
}

/// Distance from `q` to the segment `[a, b]`, together with the branch of the
/// piecewise definition that produced it.
pub fn segment_distance(q: Vec2, a: Vec2, b: Vec2) -> Result<(f64, SegmentBranch), LosError> {
    let e = b - a;
    let len_sq = e.norm_sq();
    if len_sq == 0.0 {
        return Err(LosError::DegenerateSegment);
    }
    let t = (q - a).dot(e) / len_sq;
    Ok(if t < 0.0 {
        (q.distance(a), SegmentBranch::StartVertex)
    } else if t > 1.0 {
        (q.distance(b), SegmentBranch::EndVertex)
    } else {
        ((a - q).cross(b - q).abs() / len_sq.sqrt(), SegmentBranch::Interior)
    })
}

/// Gradient of [`segment_distance`] with respect to `q`: a unit vector
/// pointing from the closest segment point toward `q`.
pub fn segment_distance_gradient(q: Vec2, a: Vec2, b: Vec2) -> Result<Vec2, LosError> {
    let (d, branch) = segment_distance(q, a, b)?;
    if d == 0.0 {
        return Err(LosError::UndefinedGradient);
    }
    Ok(match branch {
        SegmentBranch::StartVertex => (q - a) / d,
        SegmentBranch::EndVertex => (q - b) / d,
        SegmentBranch::Interior => {
            let e = b - a;
            let w = q - a;
            (w - e * (e.dot(w) / e.norm_sq())) / d
        }
    })
}

/// Result of evaluating the approximated LoS-distance at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosEvaluation {
    /// Distance to the nearest polygon edge, meters.
    pub distance: f64,
    pub argmin_edge: usize,
    /// Gradient of `distance` in the region's frame; zero on the boundary.
    pub gradient: Vec2,
    pub inside: bool,
}

impl LosEvaluation {
    /// The distance as seen by the connectivity potential: points outside the
    /// region count as zero clearance.
    pub fn effective_distance(&self) -> f64 {
        if self.inside {
            self.distance
        } else {
            0.0
        }
    }
}

/// Edges closer than this to the running minimum do not displace it, so the
/// lowest index wins a tie.
const TIE_EPS: f64 = 1e-9;

/// Approximated LoS-distance from `q` (in the polygon's frame) to the
/// polygon boundary.
pub fn polygon_los_distance(polygon: &Polygon, q: Vec2, inside: bool) -> LosEvaluation {
    let mut best = (f64::INFINITY, 0usize);
    for (k, (a, b)) in polygon.edges().enumerate() {
        let Ok((d, _)) = segment_distance(q, a, b) else {
            continue;
        };
        if d < best.0 - TIE_EPS {
            best = (d, k);
        }
    }
    let (a, b) = polygon.edge(best.1);
    let gradient = segment_distance_gradient(q, a, b).unwrap_or(Vec2::ZERO);
    LosEvaluation {
        distance: best.0,
        argmin_edge: best.1,
        gradient,
        inside,
    }
}

/// Approximated LoS-distance from `q` to the boundary of `region`, with `q`
/// in the region's local frame.
pub fn los_distance(region: &VisibleRegionPolygon, q: Vec2) -> LosEvaluation {
    polygon_los_distance(region.polygon(), q, region_contains(region, q))
}

/// Brute-force distance from `q` to the boundary of the exact visible region
/// behind `hull`: every hull edge is sampled uniformly, mapped back through
/// the flip, and the best sample is polished by a golden-section search over
/// its neighboring interval. The result is a distance to an actual boundary
/// point, so it never undershoots the true value.
pub fn exact_los_oracle(hull: &FlippedHull, r_flip: f64, q: Vec2, samples_per_edge: usize) -> Result<f64, LosError> {
    if samples_per_edge < 1000 {
        return Err(LosError::InvalidArgument("samples_per_edge must be at least 1000"));
    }
    if q != Vec2::ZERO && hull.d_hull_max(q, r_flip)? <= 0.0 {
        return Err(LosError::OutsideRegion);
    }
    let boundary_distance = |k: usize, t: f64| -> f64 {
        let (a, b) = hull.edge(k);
        let p = a + (b - a) * t;
        // Hull edges never pass through the origin, so the flip is defined.
        spherical_flip(p, r_flip).map_or(f64::INFINITY, |p| p.distance(q))
    };
    let n = samples_per_edge as f64;
    let mut best = (f64::INFINITY, 0usize, 0usize);
    for k in 0..hull.len() {
        for s in 0..=samples_per_edge {
            let d = boundary_distance(k, s as f64 / n);
            if d < best.0 {
                best = (d, k, s);
            }
        }
    }
    let (mut lo, mut hi) = (
        (best.2 as f64 - 1.0).max(0.0) / n,
        (best.2 as f64 + 1.0).min(n) / n,
    );
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = boundary_distance(best.1, x1);
    let mut f2 = boundary_distance(best.1, x2);
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = boundary_distance(best.1, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = boundary_distance(best.1, x2);
        }
    }
    Ok(best.0.min(f1).min(f2))
}

/// Default oracle resolution.
pub const ORACLE_SAMPLES_PER_EDGE: usize = 4096;

/// Parameters of the LoS connectivity potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LosParams {
    /// Clearance below which LoS counts as lost, meters.
    pub d_los_min: f64,
    /// Clearance at which the constraint starts to act, meters.
    pub d_los_max: f64,
    pub k_beta: f64,
}

impl Default for LosParams {
    fn default() -> Self {
        Self {
            d_los_min: 0.1,
            d_los_max: 1.2,
            k_beta: 1.0,
        }
    }
}

impl LosParams {
    pub fn validate(&self) -> Result<(), LosError> {
        if !(self.d_los_min >= 0.0 && self.d_los_min < self.d_los_max) {
            return Err(LosError::InvalidArgument("need 0 <= d_los_min < d_los_max"));
        }
        if !(self.k_beta > 0.0) {
            return Err(LosError::InvalidArgument("k_beta must be positive"));
        }
        Ok(())
    }
}

/// The LoS potential and its derivative at clearance `d`: zero below
/// `d_los_min`, a half-cosine ramp up to `k_beta` at `d_los_max`, flat after.
pub fn beta_potential(d: f64, p: &LosParams) -> (f64, f64) {
    if d < p.d_los_min {
        (0.0, 0.0)
    } else if d < p.d_los_max {
        let width = p.d_los_max - p.d_los_min;
        let phase = PI * (d - p.d_los_min) / width;
        (
            0.5 * p.k_beta * (1.0 - phase.cos()),
            0.5 * p.k_beta * PI / width * phase.sin(),
        )
    } else {
        (p.k_beta, 0.0)
    }
}

/// Shared LoS clearance of a pair: the smaller of the two directed values.
pub fn mutual_los_distance(eval_ji: &LosEvaluation, eval_ij: &LosEvaluation) -> f64 {
    eval_ji.effective_distance().min(eval_ij.effective_distance())
}

/// Gradient of the pair's LoS potential with respect to robot i's position,
/// in robot j's frame, with the extra pull toward j that lets an idle robot
/// act as a relay.
///
/// `eval` is robot i evaluated in j's region; the slope of the potential is
/// taken at the shared clearance `d_ij`.
pub fn reshaped_beta_gradient(
    eval: &LosEvaluation,
    d_ij: f64,
    q_i_in_j_frame: Vec2,
    p: &LosParams,
) -> Result<Vec2, LosError> {
    let toward_j = -q_i_in_j_frame.normalized().ok_or(LosError::DegeneratePosition)?;
    let (_, slope) = beta_potential(d_ij, p);
    let (beta_own, _) = beta_potential(eval.effective_distance(), p);
    Ok((eval.gradient + toward_j * beta_own) * slope)
}
