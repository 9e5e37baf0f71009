//! Weighted connectivity graph and the Fiedler-eigenvalue controller.
//!
//! Every pair of robots gets an edge weight `A_ij = alpha * beta * gamma`:
//! `alpha` fades out at the edge of communication range, `beta` is the LoS
//! potential, and `gamma` drops to zero as the pair closes in on collision.
//! Each robot then ascends the second-smallest Laplacian eigenvalue.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{d_hull_logsumexp, spherical_flip, Vec2, VisibleRegionPolygon};
use crate::los::{beta_potential, los_distance, reshaped_beta_gradient, LosError, LosEvaluation, LosParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectivityError {
    #[error("{positions} positions but {regions} regions")]
    CountMismatch { positions: usize, regions: usize },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix must be square")]
    NotSquare,
    #[error("the Fiedler pair needs at least two robots")]
    TooFewRobots,
    #[error("robots {0} and {1} share a position")]
    CoincidentRobots(usize, usize),
    #[error("invalid constraint parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Los(#[from] LosError),
}

/// Limits of the three pairwise constraints and of the eigenvalue barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintParams {
    /// Communication range, meters.
    pub d_com_max: f64,
    /// Minimum safe separation, meters.
    pub d_coll_min: f64,
    /// Width of the band below `d_com_max` over which `alpha` fades to zero.
    pub d_com_ramp: f64,
    /// Width of the band above `d_coll_min` over which `gamma` rises to one.
    pub d_coll_ramp: f64,
    pub los: LosParams,
    pub lambda2_min: f64,
    /// Distance above `lambda2_min` at which the controller gain saturates.
    pub lambda2_eps: f64,
}

impl Default for ConstraintParams {
    fn default() -> Self {
        Self {
            d_com_max: 15.0,
            d_coll_min: 0.3,
            d_com_ramp: 3.0,
            d_coll_ramp: 0.6,
            los: LosParams::default(),
            lambda2_min: 0.05,
            lambda2_eps: 1e-3,
        }
    }
}

impl ConstraintParams {
    pub fn validate(&self) -> Result<(), ConnectivityError> {
        use ConnectivityError::InvalidParams;
        if !(self.d_coll_min >= 0.0 && self.d_coll_ramp > 0.0 && self.d_com_ramp > 0.0) {
            return Err(InvalidParams("distances and ramp widths must be positive"));
        }
        if !(self.d_coll_min + self.d_coll_ramp < self.d_com_max - self.d_com_ramp) {
            return Err(InvalidParams("collision band must end before the range fade begins"));
        }
        if !(self.lambda2_min > 0.0) {
            return Err(InvalidParams("lambda2_min must be positive"));
        }
        if !(self.lambda2_eps > 0.0) {
            return Err(InvalidParams("lambda2_eps must be positive"));
        }
        self.los.validate()?;
        Ok(())
    }
}

/// Communication-range potential and its derivative in `d`.
pub fn alpha_potential(d: f64, p: &ConstraintParams) -> (f64, f64) {
    let start = p.d_com_max - p.d_com_ramp;
    if d <= start {
        (1.0, 0.0)
    } else if d < p.d_com_max {
        let phase = PI * (d - start) / p.d_com_ramp;
        (0.5 * (1.0 + phase.cos()), -0.5 * PI / p.d_com_ramp * phase.sin())
    } else {
        (0.0, 0.0)
    }
}

/// Collision potential and its derivative in `d`.
pub fn gamma_potential(d: f64, p: &ConstraintParams) -> (f64, f64) {
    if d <= p.d_coll_min {
        (0.0, 0.0)
    } else if d < p.d_coll_min + p.d_coll_ramp {
        let phase = PI * (d - p.d_coll_min) / p.d_coll_ramp;
        (0.5 * (1.0 - phase.cos()), 0.5 * PI / p.d_coll_ramp * phase.sin())
    } else {
        (1.0, 0.0)
    }
}

/// How the LoS clearance between a robot and a neighbor's region is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosMetric {
    /// Distance to the nearest edge of the approximated region polygon.
    #[default]
    DLosApprox,
    /// Log-sum-exp hull offset in flipped space.
    DHull,
    /// Hull offset scaled by the cosine between the active face normal and
    /// the query bearing.
    DHullCos,
}

impl LosMetric {
    pub const ALL: [LosMetric; 3] = [LosMetric::DLosApprox, LosMetric::DHull, LosMetric::DHullCos];

    pub fn name(self) -> &'static str {
        match self {
            LosMetric::DLosApprox => "d_los_approx",
            LosMetric::DHull => "d_hull",
            LosMetric::DHullCos => "d_hull_cos",
        }
    }
}

impl std::str::FromStr for LosMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LosMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}` (expected d_los_approx, d_hull or d_hull_cos)"))
    }
}

const HULL_FD_STEP: f64 = 1e-6;

fn hull_metric_value(region: &VisibleRegionPolygon, q: Vec2, metric: LosMetric) -> Result<f64, LosError> {
    let cfg = region.config();
    let hull = region.source_hull();
    let d = d_hull_logsumexp(hull, q, cfg.r_flip, cfg.lse_alpha)?;
    if metric == LosMetric::DHullCos {
        let k = hull.argmax_face(q, cfg.r_flip)?;
        let dir = spherical_flip(q, cfg.r_flip)?.normalized().ok_or(LosError::DegeneratePosition)?;
        Ok(d * hull.face_normals()[k].dot(dir))
    } else {
        Ok(d)
    }
}

/// Evaluates the chosen metric for a point `q` in `region`'s frame.
///
/// The hull metrics count a point as inside when the exact visibility test
/// passes, and take their gradient by central differences.
pub fn evaluate_metric(region: &VisibleRegionPolygon, q: Vec2, metric: LosMetric) -> Result<LosEvaluation, LosError> {
    match metric {
        LosMetric::DLosApprox => Ok(los_distance(region, q)),
        LosMetric::DHull | LosMetric::DHullCos => {
            if q == Vec2::ZERO {
                return Err(LosError::DegeneratePosition);
            }
            let cfg = region.config();
            let hull = region.source_hull();
            let distance = hull_metric_value(region, q, metric)?;
            let h = HULL_FD_STEP;
            let dx = hull_metric_value(region, q + Vec2::new(h, 0.0), metric)?
                - hull_metric_value(region, q - Vec2::new(h, 0.0), metric)?;
            let dy = hull_metric_value(region, q + Vec2::new(0.0, h), metric)?
                - hull_metric_value(region, q - Vec2::new(0.0, h), metric)?;
            Ok(LosEvaluation {
                distance,
                argmin_edge: hull.argmax_face(q, cfg.r_flip)?,
                gradient: Vec2::new(dx, dy) / (2.0 * h),
                inside: hull.d_hull_max(q, cfg.r_flip)? > 0.0,
            })
        }
    }
}

/// Factor breakdown of one unordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EdgeFactors {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Euclidean separation, meters.
    pub distance: f64,
    /// Shared LoS clearance `D_ij`.
    pub los_distance: f64,
}

impl EdgeFactors {
    pub fn weight(&self) -> f64 {
        self.alpha * self.beta * self.gamma
    }
}

/// Derivatives of one pair's factors with respect to the first robot of an
/// ordered pair, global frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PairGradient {
    pub alpha: Vec2,
    pub gamma: Vec2,
    /// LoS term as used by the controller, including the pull toward the
    /// neighbor.
    pub beta: Vec2,
    /// True derivative of `beta` with the neighbor's region held fixed, valid
    /// where this robot's directed clearance is the shared one.
    pub beta_exact: Vec2,
}

impl PairGradient {
    /// Product rule over the three factors.
    pub fn weight_gradient(&self, f: &EdgeFactors) -> Vec2 {
        self.alpha * (f.beta * f.gamma) + self.gamma * (f.alpha * f.beta) + self.beta * (f.alpha * f.gamma)
    }

    pub fn weight_gradient_exact(&self, f: &EdgeFactors) -> Vec2 {
        self.alpha * (f.beta * f.gamma) + self.gamma * (f.alpha * f.beta) + self.beta_exact * (f.alpha * f.gamma)
    }
}

/// Weighted graph of the team at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityState {
    weights: DMatrix<f64>,
    factors: Vec<EdgeFactors>,
    pair_grads: Vec<PairGradient>,
    /// `dA_ij/dq_i` for the current weights, row-major over ordered pairs.
    grads: Vec<Vec2>,
    laplacian: DMatrix<f64>,
    fiedler: Option<(f64, DVector<f64>)>,
}

impl ConnectivityState {
    /// Assembles a state from raw parts and solves for the Fiedler pair.
    pub fn from_parts(
        weights: DMatrix<f64>,
        factors: Vec<EdgeFactors>,
        pair_grads: Vec<PairGradient>,
        grads: Vec<Vec2>,
    ) -> Result<Self, ConnectivityError> {
        let n = weights.nrows();
        assert_eq!(factors.len(), n * n);
        assert_eq!(pair_grads.len(), n * n);
        assert_eq!(grads.len(), n * n);
        let laplacian = laplacian(&weights)?;
        let fiedler = if n >= 2 { Some(fiedler_pair(&laplacian)?) } else { None };
        Ok(Self {
            weights,
            factors,
            pair_grads,
            grads,
            laplacian,
            fiedler,
        })
    }

    pub fn robot_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn factors(&self, i: usize, j: usize) -> &EdgeFactors {
        &self.factors[i * self.robot_count() + j]
    }

    pub fn pair_gradient(&self, i: usize, j: usize) -> &PairGradient {
        &self.pair_grads[i * self.robot_count() + j]
    }

    /// `dA_ij/dq_i` consistent with the current weights.
    pub fn grad(&self, i: usize, j: usize) -> Vec2 {
        self.grads[i * self.robot_count() + j]
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// `None` for a single robot.
    pub fn lambda2(&self) -> Option<f64> {
        self.fiedler.as_ref().map(|f| f.0)
    }

    pub fn v2(&self) -> Option<&DVector<f64>> {
        self.fiedler.as_ref().map(|f| &f.1)
    }

    /// Unordered pairs with positive weight.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.robot_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.weights[(i, j)] > 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Same pair data with a different weight matrix and gradient table.
    pub fn with_weights(&self, weights: DMatrix<f64>, grads: Vec<Vec2>) -> Result<Self, ConnectivityError> {
        Self::from_parts(weights, self.factors.clone(), self.pair_grads.clone(), grads)
    }

    /// Whether robot `j` enters robot `i`'s controller sum.
    pub fn is_neighbor(&self, i: usize, j: usize) -> bool {
        i != j && (self.weights[(i, j)] > 0.0 || self.factors(i, j).gamma < 1.0)
    }
}

/// `L = D - A`.
pub fn laplacian(weights: &DMatrix<f64>) -> Result<DMatrix<f64>, ConnectivityError> {
    if !weights.is_square() {
        return Err(ConnectivityError::NotSquare);
    }
    let n = weights.nrows();
    let mut l = -weights.clone();
    for i in 0..n {
        l[(i, i)] = 0.0;
        let degree: f64 = (0..n).filter(|&j| j != i).map(|j| weights[(i, j)]).sum();
        l[(i, i)] = degree;
    }
    Ok(l)
}

/// Connected components of the positive-weight graph behind `l`, as a
/// component label per vertex.
fn components(l: &DMatrix<f64>) -> Vec<usize> {
    let n = l.nrows();
    let mut sets = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if -l[(i, j)] > 0.0 {
                sets.union(i, j);
            }
        }
    }
    sets.into_labeling()
}

const SIGN_EPS: f64 = 1e-12;

fn fix_sign(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Second-smallest eigenvalue of a graph Laplacian and a unit eigenvector for
/// it, orthogonal to the all-ones vector and sign-fixed so its first
/// non-negligible entry is positive.
///
/// A disconnected graph reports exactly zero, with the centered indicator of
/// the first vertex's component as the vector.
pub fn fiedler_pair(l: &DMatrix<f64>) -> Result<(f64, DVector<f64>), ConnectivityError> {
    if !l.is_square() {
        return Err(ConnectivityError::NotSquare);
    }
    let n = l.nrows();
    if n < 2 {
        return Err(ConnectivityError::TooFewRobots);
    }
    let asym = (l - l.transpose()).amax();
    if asym > 1e-9 {
        return Err(ConnectivityError::NotSymmetric(asym));
    }
    let labels = components(l);
    if labels.iter().any(|&c| c != labels[0]) {
        let inside = labels.iter().filter(|&&c| c == labels[0]).count() as f64;
        let share = inside / n as f64;
        let mut v = DVector::from_iterator(
            n,
            labels.iter().map(|&c| if c == labels[0] { 1.0 - share } else { -share }),
        );
        v.normalize_mut();
        fix_sign(&mut v);
        return Ok((0.0, v));
    }
    let eig = SymmetricEigen::new(l.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[1];
    let mut v = eig.eigenvectors.column(k).into_owned();
    let mean = v.mean();
    v.add_scalar_mut(-mean);
    v.normalize_mut();
    fix_sign(&mut v);
    Ok((eig.eigenvalues[k], v))
}

/// Factors of the pair `(i, j)` and the gradients of its weight with respect
/// to each robot, `(factors, d/dq_i, d/dq_j)`.
///
/// Each region is in its owner's frame, centred on the owner's position. A
/// pair beyond communication range is not evaluated: it gets zero `alpha`
/// and `beta` and zero gradients.
pub fn pair_terms(
    q_i: Vec2,
    region_i: &VisibleRegionPolygon,
    q_j: Vec2,
    region_j: &VisibleRegionPolygon,
    p: &ConstraintParams,
    metric: LosMetric,
) -> Result<(EdgeFactors, PairGradient, PairGradient), ConnectivityError> {
    let offset = q_i - q_j;
    let d = offset.norm();
    if d == 0.0 {
        return Err(ConnectivityError::CoincidentRobots(region_i.robot_id(), region_j.robot_id()));
    }
    let (gamma, gamma_slope) = gamma_potential(d, p);
    if d >= p.d_com_max {
        let f = EdgeFactors {
            gamma,
            distance: d,
            ..EdgeFactors::default()
        };
        return Ok((f, PairGradient::default(), PairGradient::default()));
    }
    let unit = offset / d;
    let (alpha, alpha_slope) = alpha_potential(d, p);
    // i seen from j's region, and j seen from i's.
    let eval_ji = evaluate_metric(region_j, offset, metric)?;
    let eval_ij = evaluate_metric(region_i, -offset, metric)?;
    let shared = eval_ji.effective_distance().min(eval_ij.effective_distance());
    let (beta, beta_slope) = beta_potential(shared, &p.los);
    let f = EdgeFactors {
        alpha,
        beta,
        gamma,
        distance: d,
        los_distance: shared,
    };
    let exact = |eval: &LosEvaluation| {
        if eval.inside {
            eval.gradient * beta_slope
        } else {
            Vec2::ZERO
        }
    };
    let grad_i = PairGradient {
        alpha: unit * alpha_slope,
        gamma: unit * gamma_slope,
        beta: reshaped_beta_gradient(&eval_ji, shared, offset, &p.los)?,
        beta_exact: exact(&eval_ji),
    };
    let grad_j = PairGradient {
        alpha: -unit * alpha_slope,
        gamma: -unit * gamma_slope,
        beta: reshaped_beta_gradient(&eval_ij, shared, -offset, &p.los)?,
        beta_exact: exact(&eval_ij),
    };
    Ok((f, grad_i, grad_j))
}

/// Computes the factors, weights and gradients of every pair.
///
/// `regions[j]` is robot j's region in its own frame, whose origin sits at
/// `positions[j]`.
pub fn build_connectivity_state(
    positions: &[Vec2],
    regions: &[VisibleRegionPolygon],
    p: &ConstraintParams,
    metric: LosMetric,
) -> Result<ConnectivityState, ConnectivityError> {
    if positions.len() != regions.len() {
        return Err(ConnectivityError::CountMismatch {
            positions: positions.len(),
            regions: regions.len(),
        });
    }
    let n = positions.len();
    let mut weights = DMatrix::zeros(n, n);
    let mut factors = vec![EdgeFactors::default(); n * n];
    let mut pair_grads = vec![PairGradient::default(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (f, gi, gj) = pair_terms(positions[i], &regions[i], positions[j], &regions[j], p, metric)
                .map_err(|e| match e {
                    ConnectivityError::CoincidentRobots(..) => ConnectivityError::CoincidentRobots(i, j),
                    other => other,
                })?;
            factors[i * n + j] = f;
            factors[j * n + i] = f;
            weights[(i, j)] = f.weight();
            weights[(j, i)] = f.weight();
            pair_grads[i * n + j] = gi;
            pair_grads[j * n + i] = gj;
        }
    }
    let grads = (0..n * n)
        .map(|k| pair_grads[k].weight_gradient(&factors[k]))
        .collect();
    ConnectivityState::from_parts(weights, factors, pair_grads, grads)
}

/// Controller gain `1/(lambda2 - lambda2_min)^2`, and whether it saturated.
pub fn connectivity_gain(lambda2: f64, p: &ConstraintParams) -> (f64, bool) {
    let margin = lambda2 - p.lambda2_min;
    if margin <= p.lambda2_eps {
        (1.0 / (p.lambda2_eps * p.lambda2_eps), true)
    } else {
        (1.0 / (margin * margin), false)
    }
}

/// Velocity that raises the team's Fiedler eigenvalue, for one robot.
///
/// Only pairs involving `robot` and the team's Fiedler pair are read. The
/// second value reports gain saturation.
pub fn connectivity_velocity(robot: usize, state: &ConnectivityState, p: &ConstraintParams) -> (Vec2, bool) {
    let Some((lambda2, v2)) = state.fiedler.as_ref() else {
        return (Vec2::ZERO, false);
    };
    let (gain, saturated) = connectivity_gain(*lambda2, p);
    if saturated {
        tracing::debug!(robot, lambda2, "connectivity gain saturated");
    }
    let mut sum = Vec2::ZERO;
    for j in 0..state.robot_count() {
        if state.is_neighbor(robot, j) {
            let dv = v2[robot] - v2[j];
            sum += state.grad(robot, j) * (dv * dv);
        }
    }
    (sum * gain, saturated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{approx_visible_region, flipped_convex_hull, FlipConfig, Scan};

    fn open_region(range: f64) -> VisibleRegionPolygon {
        let scan = Scan::ring(range, 720);
        let cfg = FlipConfig::default();
        approx_visible_region(&flipped_convex_hull(&scan, &cfg).unwrap(), &cfg).unwrap()
    }

    #[test]
    fn potential_examples() {
        let p = ConstraintParams::default();
        assert_eq!(alpha_potential(0.0, &p).0, 1.0);
        assert_eq!(alpha_potential(p.d_com_max, &p).0, 0.0);
        assert!((alpha_potential(p.d_com_max - p.d_com_ramp / 2.0, &p).0 - 0.5).abs() < 1e-12);
        assert_eq!(gamma_potential(p.d_coll_min, &p).0, 0.0);
        assert_eq!(gamma_potential(100.0, &p).0, 1.0);
        assert!((gamma_potential(p.d_coll_min + p.d_coll_ramp / 2.0, &p).0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn potential_derivatives_match_differences() {
        let p = ConstraintParams::default();
        let h = 1e-6;
        for k in 1..200 {
            let d = 0.1 * k as f64;
            for f in [alpha_potential, gamma_potential] {
                let fd = (f(d + h, &p).0 - f(d - h, &p).0) / (2.0 * h);
                assert!((fd - f(d, &p).1).abs() < 1e-5, "d={d}");
            }
            assert!(alpha_potential(d, &p).1 <= 0.0);
            assert!(gamma_potential(d, &p).1 >= 0.0);
        }
    }

    #[test]
    fn params_validation() {
        assert!(ConstraintParams::default().validate().is_ok());
        let bad = ConstraintParams {
            d_com_max: 1.0,
            ..ConstraintParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in LosMetric::ALL {
            assert_eq!(m.name().parse::<LosMetric>().unwrap(), m);
        }
        assert!("hull".parse::<LosMetric>().is_err());
    }

    #[test]
    fn open_space_pair_sits_on_the_plateau() {
        let p = ConstraintParams::default();
        let positions = [Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0)];
        let regions = [open_region(30.0), open_region(30.0)];
        let s = build_connectivity_state(&positions, &regions, &p, LosMetric::DLosApprox).unwrap();
        assert_eq!(s.weight(0, 1), p.los.k_beta);
        assert!(s.lambda2().unwrap() > 0.0);
        assert_eq!(connectivity_velocity(0, &s, &p).0, Vec2::ZERO);
    }

    #[test]
    fn pair_in_fade_band_attracts() {
        let p = ConstraintParams::default();
        let positions = [Vec2::new(0.0, 0.0), Vec2::new(13.5, 0.0)];
        let regions = [open_region(30.0), open_region(30.0)];
        let s = build_connectivity_state(&positions, &regions, &p, LosMetric::DLosApprox).unwrap();
        let (u0, _) = connectivity_velocity(0, &s, &p);
        let (u1, _) = connectivity_velocity(1, &s, &p);
        assert!(u0.x > 0.0 && u1.x < 0.0);
        assert!((u0 + u1).norm() < 1e-12);
        // (v_i - v_j)^2 = 2 for the antisymmetric unit vector.
        let (gain, _) = connectivity_gain(s.lambda2().unwrap(), &p);
        let want = s.grad(0, 1) * 2.0 * gain;
        assert!((u0 - want).norm() < 1e-9);
    }

    #[test]
    fn small_graph_eigenvalues() {
        let path = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let (l2, v) = fiedler_pair(&laplacian(&path).unwrap()).unwrap();
        assert!((l2 - 1.0).abs() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12 && v.sum().abs() < 1e-12 && v[0] > 0.0);
        let complete = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        assert!((fiedler_pair(&laplacian(&complete).unwrap()).unwrap().0 - 3.0).abs() < 1e-12);
        let split = DMatrix::from_row_slice(4, 4, &[
            0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 2.0, 0.0,
        ]);
        let (l2, v) = fiedler_pair(&laplacian(&split).unwrap()).unwrap();
        assert_eq!(l2, 0.0);
        let l = laplacian(&split).unwrap();
        assert!((&l * &v).norm() < 1e-12 && v.sum().abs() < 1e-12);
    }

    #[test]
    fn fiedler_rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -0.5, 0.5]);
        assert!(matches!(fiedler_pair(&m), Err(ConnectivityError::NotSymmetric(_))));
        assert_eq!(fiedler_pair(&DMatrix::zeros(1, 1)), Err(ConnectivityError::TooFewRobots));
    }

    #[test]
    fn gain_saturates_near_the_bound() {
        let p = ConstraintParams::default();
        assert_eq!(connectivity_gain(p.lambda2_min, &p), (1e6, true));
        let (g, sat) = connectivity_gain(p.lambda2_min + 0.5, &p);
        assert!(!sat && (g - 4.0).abs() < 1e-12);
    }
}
