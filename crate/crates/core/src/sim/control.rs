use serde::{Deserialize, Serialize};

use crate::geometry::{Scan, Vec2};

/// Drops scan points within `cull_radius` of any neighbor. Neighbor positions
/// are in the sensor frame.
pub fn remove_neighbor_points(scan: &Scan, neighbors: &[Vec2], cull_radius: f64) -> Scan {
    if neighbors.is_empty() {
        return scan.clone();
    }
    scan.filtered(|p| neighbors.iter().all(|&n| p.distance(n) > cull_radius))
}

/// Scales `v` down to length `max` if it is longer.
pub fn clamp_norm(v: Vec2, max: f64) -> Vec2 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

/// Tuning of the goal-seeking velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavParams {
    pub u_max: f64,
    pub dt: f64,
    /// Clearance below which obstacles push back at full speed.
    pub d_coll_min: f64,
    /// Width of the band above `d_coll_min` where the push fades out.
    pub d_coll_ramp: f64,
}

/// Velocity toward `target` (world frame) at up to `u_max`, slowing only to
/// land on the target in one tick, plus a push away from the nearest scan
/// point once it is closer than `d_coll_min + d_coll_ramp`.
pub fn navigation_velocity(position: Vec2, scan: &Scan, target: Option<Vec2>, p: &NavParams) -> Vec2 {
    let Some(target) = target else {
        return Vec2::ZERO;
    };
    let to_goal = target - position;
    let dist = to_goal.norm();
    let mut u = if dist > 0.0 {
        to_goal * (p.u_max.min(dist / p.dt) / dist)
    } else {
        Vec2::ZERO
    };
    if let Some(obstacle) = scan.nearest() {
        let r = obstacle.norm();
        let reach = p.d_coll_min + p.d_coll_ramp;
        if r < reach {
            let strength = (reach - r) / p.d_coll_ramp;
            u -= obstacle / r * (p.u_max * strength);
        }
    }
    if dist == 0.0 {
        return Vec2::ZERO;
    }
    u
}
