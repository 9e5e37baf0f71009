use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec2};

/// One egocentric LiDAR sweep. Points are in the sensor frame, ordered by
/// bearing in `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    points: Vec<Vec2>,
    max_range: f64,
    beam_count: usize,
}

/// Bearing normalized to `[0, 2pi)`.
fn bearing(p: Vec2) -> f64 {
    let a = p.angle();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

const BEARING_EPS: f64 = 1e-12;

impl Scan {
    /// Validates ranges and normalizes ordering. Points sharing a bearing keep
    /// only the nearest return.
    pub fn new(points: Vec<Vec2>, max_range: f64, beam_count: usize) -> Result<Self, GeometryError> {
        for (index, p) in points.iter().enumerate() {
            let range = p.norm();
            // Rounding in polar-to-Cartesian conversion can overshoot by an ulp.
            if !(range > 0.0 && range <= max_range * (1.0 + 1e-12)) || !range.is_finite() {
                return Err(GeometryError::PointOutOfRange {
                    index,
                    range,
                    max_range,
                });
            }
        }
        let mut keyed: Vec<(f64, Vec2)> = points.into_iter().map(|p| (bearing(p), p)).collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.norm().total_cmp(&b.1.norm())));
        let mut out: Vec<(f64, Vec2)> = Vec::with_capacity(keyed.len());
        for (b, p) in keyed {
            match out.last() {
                Some(&(lb, _)) if (b - lb).abs() <= BEARING_EPS => {}
                _ => out.push((b, p)),
            }
        }
        // A bearing just under 2pi may duplicate one near 0.
        if out.len() > 1 {
            let (first, last) = (out[0].0, out[out.len() - 1].0);
            if (first + TAU - last).abs() <= BEARING_EPS {
                let drop_last = out[out.len() - 1].1.norm() >= out[0].1.norm();
                if drop_last {
                    out.pop();
                } else {
                    out.remove(0);
                }
            }
        }
        Ok(Self {
            points: out.into_iter().map(|(_, p)| p).collect(),
            max_range,
            beam_count,
        })
    }

    /// A full ring of `count` points at `max_range`, the view of open space.
    pub fn ring(max_range: f64, count: usize) -> Self {
        let points = (0..count)
            .map(|k| Vec2::from_angle(TAU * k as f64 / count as f64) * max_range)
            .collect();
        Self {
            points,
            max_range,
            beam_count: count,
        }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    pub fn beam_count(&self) -> usize {
        self.beam_count
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Angular pitch of the sensor's beams.
    pub fn beam_pitch(&self) -> f64 {
        TAU / self.beam_count.max(1) as f64
    }

    pub fn bearings(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&p| bearing(p))
    }

    /// Keeps the points for which `keep` holds.
    pub fn filtered(&self, mut keep: impl FnMut(Vec2) -> bool) -> Scan {
        Scan {
            points: self.points.iter().copied().filter(|&p| keep(p)).collect(),
            max_range: self.max_range,
            beam_count: self.beam_count,
        }
    }

    /// Nearest return, if any.
    pub fn nearest(&self) -> Option<Vec2> {
        self.points
            .iter()
            .copied()
            .min_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
    }
}

/// Fills every bearing gap wider than `gap_threshold` with synthetic returns
/// at `max_range`, spaced uniformly at a pitch no wider than the threshold.
pub fn augment_scan(scan: &Scan, gap_threshold: f64) -> Result<Scan, GeometryError> {
    if scan.is_empty() {
        return Err(GeometryError::EmptyScan);
    }
    if !(gap_threshold > 0.0) {
        return Err(GeometryError::InvalidConfig("gap_threshold must be positive"));
    }
    let bearings: Vec<f64> = scan.bearings().collect();
    let n = bearings.len();
    let mut points = scan.points.clone();
    for i in 0..n {
        let start = bearings[i];
        let end = if i + 1 < n { bearings[i + 1] } else { bearings[0] + TAU };
        let gap = end - start;
        if gap > gap_threshold * (1.0 + 1e-9) {
            let pieces = (gap / gap_threshold - 1e-9).ceil() as usize;
            let pitch = gap / pieces as f64;
            for m in 1..pieces {
                points.push(Vec2::from_angle(start + pitch * m as f64) * scan.max_range);
            }
        }
    }
    Scan::new(points, scan.max_range, scan.beam_count)
}
