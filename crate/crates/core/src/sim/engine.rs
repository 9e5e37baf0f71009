use serde::{Deserialize, Serialize};

use super::control::{clamp_norm, navigation_velocity, remove_neighbor_points, NavParams};
use super::world::{raycast_lidar, GridPlanner, WorldModel};
use super::SimError;
use crate::connectivity::{
    build_connectivity_state, connectivity_gain, connectivity_velocity, pair_terms, ConnectivityState,
    ConstraintParams, LosMetric,
};
use crate::geometry::{
    approx_visible_region, augment_scan, flipped_convex_hull, FlipConfig, Scan, Vec2, VisibleRegionPolygon,
};
use crate::topology::{apply_mask, plan_topology};

/// How the maintained topology is chosen each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// The spanning tree chosen at tick 0, kept for the whole run.
    FixedTopology,
    /// No masking; every live edge is maintained.
    Laplacian,
    /// A fresh minimum spanning tree every tick.
    #[default]
    TopoOpt,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::FixedTopology, Strategy::Laplacian, Strategy::TopoOpt];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::FixedTopology => "fixed-topology",
            Strategy::Laplacian => "laplacian",
            Strategy::TopoOpt => "topo-opt",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}` (expected fixed-topology, laplacian or topo-opt)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Has a target to reach.
    Tasked,
    /// Moves only to keep the team connected.
    Free,
}

/// Simulation parameters. Every field has a default, so partial configs
/// deserialize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Seconds per tick.
    pub dt: f64,
    /// Speed limit, m/s.
    pub u_max: f64,
    pub beam_count: usize,
    /// LiDAR range, meters.
    pub lidar_range: f64,
    /// Scan points this close to a known neighbor are dropped.
    pub neighbor_cull_radius: f64,
    /// Radius of the disc other robots' LiDARs see.
    pub robot_radius: f64,
    /// A target counts as visited once its robot is this close.
    pub capture_radius: f64,
    pub rng_seed: u64,
    pub strategy: Strategy,
    pub metric: LosMetric,
    pub constraints: ConstraintParams,
    pub flip: FlipConfig,
    /// Widest bearing gap left unfilled in a scan; twice the beam pitch when
    /// unset.
    pub gap_threshold: Option<f64>,
    /// `(k_c, k_n)` for tasked robots.
    pub tasked_gains: (f64, f64),
    /// `(k_c, k_n)` for free robots.
    pub free_gains: (f64, f64),
    /// Ticks a topo-opt tree is kept before re-planning; 0 re-plans every
    /// tick.
    pub dwell_ticks: u64,
    /// Recompute every connectivity velocity from its one-hop slice and fail
    /// on any difference.
    pub audit: bool,
    /// Cell size of the waypoint planner, meters.
    pub planner_resolution: f64,
    /// Clearance the waypoint planner keeps from obstacles, meters.
    pub planner_inflation: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            u_max: 1.0,
            beam_count: 720,
            lidar_range: 30.0,
            neighbor_cull_radius: 0.35,
            robot_radius: 0.12,
            capture_radius: 0.3,
            rng_seed: 0,
            strategy: Strategy::default(),
            metric: LosMetric::default(),
            constraints: ConstraintParams::default(),
            flip: FlipConfig::default(),
            gap_threshold: None,
            tasked_gains: (1.0, 1.0),
            free_gains: (1.0, 0.0),
            dwell_ticks: 0,
            audit: false,
            planner_resolution: 0.2,
            planner_inflation: 0.6,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.u_max > 0.0) {
            return bad("u_max must be positive");
        }
        if self.beam_count < 3 {
            return bad("beam_count must be at least 3");
        }
        if !(self.lidar_range > 0.0) {
            return bad("lidar_range must be positive");
        }
        if !(self.flip.r_flip > self.lidar_range) {
            return bad("r_flip must exceed lidar_range");
        }
        if !(self.planner_resolution > 0.0) {
            return bad("planner_resolution must be positive");
        }
        self.flip.validate()?;
        self.constraints.validate()?;
        Ok(())
    }

    fn nav(&self) -> NavParams {
        NavParams {
            u_max: self.u_max,
            dt: self.dt,
            d_coll_min: self.constraints.d_coll_min,
            d_coll_ramp: self.constraints.d_coll_ramp,
        }
    }
}

/// Initial placement and tasking of one robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub start: Vec2,
    /// Target indices, visited in order.
    #[serde(default)]
    pub targets: Vec<usize>,
    /// Driven by live commands instead of the goal seeker.
    #[serde(default)]
    pub leader: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub position: Vec2,
    pub targets: Vec<usize>,
    /// Index into `targets` of the one being pursued.
    pub next: usize,
    pub role: Role,
    pub leader: bool,
    pub last_command: Vec2,
    path: Vec<Vec2>,
    cursor: usize,
}

impl RobotState {
    pub fn current_target(&self) -> Option<usize> {
        self.targets.get(self.next).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimEvent {
    /// The connectivity gain hit its clamp.
    GainSaturated { robot: usize },
    /// A step was undone; `blocker` is the robot it would have hit, or none
    /// for an obstacle.
    StepRejected { robot: usize, blocker: Option<usize> },
    TargetVisited { robot: usize, target: usize },
    /// The live graph did not span the team; a forest was planned.
    Forest { edges: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub role: Role,
    pub u_c: Vec2,
    pub u_n: Vec2,
    /// Fused, speed-limited command.
    pub command: Vec2,
    pub rejected: bool,
}

impl RobotRecord {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Velocity actually applied this tick.
    pub fn applied(&self) -> Vec2 {
        if self.rejected {
            Vec2::ZERO
        } else {
            self.command
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub i: usize,
    pub j: usize,
    /// Weight the controller acted on (after masking).
    pub weight: f64,
    /// Unmasked `alpha * beta * gamma`.
    pub raw_weight: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub los_distance: f64,
    pub in_tree: bool,
}

/// Everything observable about one tick. Positions are the ones the tick's
/// computations used, i.e. before the step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// `None` for a single robot.
    pub lambda2: Option<f64>,
    /// Pairs with positive weight in the matrix the controller used.
    pub edge_count: usize,
    /// Whether the pairs in range with an unobstructed sight line connect
    /// the team.
    pub los_connected: bool,
    pub robots: Vec<RobotRecord>,
    pub edges: Vec<EdgeRecord>,
    pub events: Vec<SimEvent>,
}

/// Live simulation state: the world, the team, and the strategy's memory.
#[derive(Debug, Clone)]
pub struct Simulation {
    world: WorldModel,
    cfg: SimConfig,
    robots: Vec<RobotState>,
    tick: u64,
    visited: Vec<Option<u64>>,
    planner: GridPlanner,
    fixed_tree: Option<Vec<(usize, usize)>>,
    held_tree: Option<(Vec<(usize, usize)>, u64)>,
    leader_command: Vec2,
    regions: Vec<VisibleRegionPolygon>,
}

const LOOKAHEAD: usize = 40;
// Absorbs rounding in positions accumulated over many ticks.
const CAPTURE_SLACK: f64 = 1e-9;

impl Simulation {
    pub fn new(world: WorldModel, robots: &[RobotSpec], cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        world.validate()?;
        let mut states = Vec::with_capacity(robots.len());
        for (id, spec) in robots.iter().enumerate() {
            if world.inside_obstacle(spec.start) {
                return Err(SimError::PoseInObstacle(spec.start));
            }
            if let Some(&bad) = spec.targets.iter().find(|&&t| t >= world.targets.len()) {
                return Err(SimError::UnknownTarget { robot: id, target: bad });
            }
            states.push(RobotState {
                id,
                position: spec.start,
                targets: spec.targets.clone(),
                next: 0,
                role: if spec.targets.is_empty() { Role::Free } else { Role::Tasked },
                leader: spec.leader,
                last_command: Vec2::ZERO,
                path: Vec::new(),
                cursor: 0,
            });
        }
        let planner = GridPlanner::new(&world, cfg.planner_resolution, cfg.planner_inflation);
        Ok(Self {
            visited: vec![None; world.targets.len()],
            world,
            cfg,
            robots: states,
            tick: 0,
            planner,
            fixed_tree: None,
            held_tree: None,
            leader_command: Vec2::ZERO,
            regions: Vec::new(),
        })
    }

    pub fn world(&self) -> &WorldModel {
        &self.world
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.robots.iter().map(|r| r.position).collect()
    }

    /// Number of ticks executed so far.
    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    /// Tick count at which each target was first reached, if it was.
    pub fn visited(&self) -> &[Option<u64>] {
        &self.visited
    }

    /// Regions built during the last tick, in each robot's frame.
    pub fn regions(&self) -> &[VisibleRegionPolygon] {
        &self.regions
    }

    /// Every robot has finished its target list.
    pub fn done(&self) -> bool {
        self.robots.iter().all(|r| r.current_target().is_none())
    }

    pub fn leader(&self) -> Option<usize> {
        self.robots.iter().position(|r| r.leader)
    }

    /// Velocity the leader will try to follow, clamped to the speed limit.
    pub fn set_leader_command(&mut self, v: Vec2) {
        self.leader_command = clamp_norm(v, self.cfg.u_max);
    }

    pub fn set_d_los_max(&mut self, value: f64) -> Result<(), SimError> {
        let mut c = self.cfg.constraints;
        c.los.d_los_max = value;
        c.validate()?;
        self.cfg.constraints = c;
        Ok(())
    }

    pub fn set_strategy(&mut self, strategy: Strategy) {
        if strategy != self.cfg.strategy {
            self.cfg.strategy = strategy;
            self.fixed_tree = None;
            self.held_tree = None;
        }
    }

    /// Builds robot `i`'s scan (raw, sensor frame) and visible region.
    fn sense(&self, i: usize, positions: &[Vec2]) -> Result<(Scan, VisibleRegionPolygon), SimError> {
        let q = positions[i];
        let others: Vec<Vec2> = positions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &p)| p)
            .collect();
        let raw = raycast_lidar(
            &self.world,
            q,
            self.cfg.beam_count,
            self.cfg.lidar_range,
            &others,
            self.cfg.robot_radius,
        )?;
        let neighbors: Vec<Vec2> = others
            .iter()
            .filter(|p| p.distance(q) < self.cfg.constraints.d_com_max)
            .map(|&p| p - q)
            .collect();
        let culled = remove_neighbor_points(&raw, &neighbors, self.cfg.neighbor_cull_radius);
        let augmented = if culled.is_empty() {
            Scan::ring(self.cfg.lidar_range, self.cfg.beam_count)
        } else {
            let threshold = self.cfg.gap_threshold.unwrap_or(2.0 * raw.beam_pitch());
            augment_scan(&culled, threshold)?
        };
        let hull = flipped_convex_hull(&augmented, &self.cfg.flip)?;
        let region = approx_visible_region(&hull, &self.cfg.flip)?.with_robot_id(i);
        Ok((raw, region))
    }

    fn graph_at(&self, positions: &[Vec2]) -> Result<Option<ConnectivityState>, SimError> {
        if positions.len() < 2 {
            return Ok(None);
        }
        let regions = (0..positions.len())
            .map(|i| self.sense(i, positions).map(|(_, r)| r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(build_connectivity_state(positions, &regions, &self.cfg.constraints, self.cfg.metric)?))
    }

    /// Algebraic connectivity of the unmasked graph at the current
    /// positions. Does not advance the simulation.
    pub fn current_lambda2(&self) -> Result<Option<f64>, SimError> {
        Ok(self.graph_at(&self.positions())?.and_then(|s| s.lambda2()))
    }

    /// Algebraic connectivity the controller would act on with the team at
    /// `positions`, using a freshly planned tree (or the stored one for the
    /// fixed strategy).
    pub fn controller_lambda2_at(&self, positions: &[Vec2]) -> Result<Option<f64>, SimError> {
        let Some(state) = self.graph_at(positions)? else {
            return Ok(None);
        };
        let d_com_max = self.cfg.constraints.d_com_max;
        let tree = match (self.cfg.strategy, &self.fixed_tree) {
            (Strategy::Laplacian, _) => return Ok(state.lambda2()),
            (Strategy::FixedTopology, Some(edges)) => {
                edges.iter().copied().filter(|&(i, j)| state.weight(i, j) > 0.0).collect()
            }
            _ => plan_topology(&state, d_com_max)?.tree.edges,
        };
        Ok(apply_mask(&state, &tree)?.lambda2())
    }

    /// Tree edges the controller maintains this tick, or `None` for no
    /// masking.
    fn select_tree(&mut self, state: &ConnectivityState, events: &mut Vec<SimEvent>) -> Result<Option<Vec<(usize, usize)>>, SimError> {
        let d_com_max = self.cfg.constraints.d_com_max;
        let live = |edges: &[(usize, usize)]| -> Vec<(usize, usize)> {
            edges.iter().copied().filter(|&(i, j)| state.weight(i, j) > 0.0).collect()
        };
        let n = state.robot_count();
        let tree = match self.cfg.strategy {
            Strategy::Laplacian => return Ok(None),
            Strategy::FixedTopology => {
                if self.fixed_tree.is_none() {
                    self.fixed_tree = Some(plan_topology(state, d_com_max)?.tree.edges);
                }
                live(self.fixed_tree.as_deref().unwrap_or_default())
            }
            Strategy::TopoOpt => {
                let reuse = match &self.held_tree {
                    Some((edges, age)) if *age < self.cfg.dwell_ticks => {
                        let kept = live(edges);
                        (kept.len() == edges.len()).then_some(kept)
                    }
                    _ => None,
                };
                match reuse {
                    Some(edges) => {
                        if let Some((_, age)) = &mut self.held_tree {
                            *age += 1;
                        }
                        edges
                    }
                    None => {
                        let edges = plan_topology(state, d_com_max)?.tree.edges;
                        self.held_tree = Some((edges.clone(), 1));
                        edges
                    }
                }
            }
        };
        if tree.len() + 1 < n {
            events.push(SimEvent::Forest { edges: tree.len() });
        }
        Ok(Some(tree))
    }

    /// Next point on robot `i`'s route to its target.
    fn waypoint(&mut self, i: usize) -> Option<Vec2> {
        let target = self.world.targets[self.robots[i].current_target()?];
        let q = self.robots[i].position;
        let margin = self.cfg.constraints.d_coll_min;
        if self.world.segment_clearance(q, target) >= margin {
            return Some(target);
        }
        for attempt in 0..2 {
            let robot = &self.robots[i];
            if attempt == 1 || robot.path.is_empty() {
                let path = self.planner.plan(q, target).unwrap_or_else(|| vec![target]);
                let robot = &mut self.robots[i];
                robot.path = path;
                robot.cursor = 0;
            }
            let robot = &self.robots[i];
            let end = (robot.cursor + LOOKAHEAD).min(robot.path.len());
            let best = (robot.cursor..end)
                .rev()
                .find(|&k| self.world.segment_clearance(q, robot.path[k]) >= margin);
            if let Some(k) = best {
                self.robots[i].cursor = k;
                return Some(self.robots[i].path[k]);
            }
        }
        Some(target)
    }

    fn slice_velocity(
        &self,
        i: usize,
        positions: &[Vec2],
        tree: Option<&[(usize, usize)]>,
        lambda2: f64,
        v2: &[f64],
    ) -> Result<Vec2, SimError> {
        let p = &self.cfg.constraints;
        let regions = &self.regions;
        let (gain, _) = connectivity_gain(lambda2, p);
        let mut sum = Vec2::ZERO;
        for j in 0..positions.len() {
            if j == i || positions[i].distance(positions[j]) >= p.d_com_max {
                continue;
            }
            let (f, g, _) = pair_terms(positions[i], &regions[i], positions[j], &regions[j], p, self.cfg.metric)?;
            let key = (i.min(j), i.max(j));
            let (weight, grad) = match tree {
                Some(t) if !t.contains(&key) => {
                    let w = if f.gamma == 1.0 { 0.0 } else { f.gamma };
                    (w, if w == 0.0 { Vec2::ZERO } else { g.gamma })
                }
                _ => (f.weight(), g.weight_gradient(&f)),
            };
            if weight > 0.0 || f.gamma < 1.0 {
                let dv = v2[i] - v2[j];
                sum += grad * (dv * dv);
            }
        }
        Ok(sum * gain)
    }

    /// Runs one control tick and advances the clock.
    pub fn tick(&mut self) -> Result<TickRecord, SimError> {
        let n = self.robots.len();
        let positions = self.positions();
        let mut scans = Vec::with_capacity(n);
        let mut regions = Vec::with_capacity(n);
        for i in 0..n {
            let (scan, region) = self.sense(i, &positions)?;
            scans.push(scan);
            regions.push(region);
        }
        self.regions = regions;
        let mut events = Vec::new();

        let mut u_c = vec![Vec2::ZERO; n];
        let mut graph = None;
        if n >= 2 {
            let state = build_connectivity_state(&positions, &self.regions, &self.cfg.constraints, self.cfg.metric)?;
            let tree = self.select_tree(&state, &mut events)?;
            let controlled = match &tree {
                Some(t) => apply_mask(&state, t)?,
                None => state.clone(),
            };
            for (i, u) in u_c.iter_mut().enumerate() {
                let (v, saturated) = connectivity_velocity(i, &controlled, &self.cfg.constraints);
                if saturated {
                    events.push(SimEvent::GainSaturated { robot: i });
                }
                *u = v;
            }
            if self.cfg.audit {
                let lambda2 = controlled.lambda2().unwrap_or(0.0);
                let v2: Vec<f64> = controlled.v2().map(|v| v.iter().copied().collect()).unwrap_or_default();
                for (i, &global) in u_c.iter().enumerate() {
                    let local = self.slice_velocity(i, &positions, tree.as_deref(), lambda2, &v2)?;
                    if local != global {
                        return Err(SimError::AuditMismatch { robot: i, global, local });
                    }
                }
            }
            graph = Some((state, controlled, tree));
        }

        let nav = self.cfg.nav();
        let mut u_n = vec![Vec2::ZERO; n];
        let mut commands = vec![Vec2::ZERO; n];
        for i in 0..n {
            let robot = &self.robots[i];
            let (k_c, k_n) = if robot.leader {
                (self.cfg.tasked_gains.0, 1.0)
            } else if robot.role == Role::Tasked {
                self.cfg.tasked_gains
            } else {
                self.cfg.free_gains
            };
            u_n[i] = if robot.leader {
                self.leader_command
            } else {
                let waypoint = self.waypoint(i);
                navigation_velocity(positions[i], &scans[i], waypoint, &nav)
            };
            commands[i] = clamp_norm(u_c[i] * k_c + u_n[i] * k_n, self.cfg.u_max);
        }

        let rejected = self.step(&positions, &commands, &mut events);

        let robots = (0..n)
            .map(|i| RobotRecord {
                id: i,
                x: positions[i].x,
                y: positions[i].y,
                role: self.robots[i].role,
                u_c: u_c[i],
                u_n: u_n[i],
                command: commands[i],
                rejected: rejected[i],
            })
            .collect();
        self.update_targets(&mut events);

        let (lambda2, edge_count, edges) = match &graph {
            Some((state, controlled, tree)) => {
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        let (raw, weight) = (state.weight(i, j), controlled.weight(i, j));
                        if raw > 0.0 || weight > 0.0 {
                            let f = state.factors(i, j);
                            edges.push(EdgeRecord {
                                i,
                                j,
                                weight,
                                raw_weight: raw,
                                alpha: f.alpha,
                                beta: f.beta,
                                gamma: f.gamma,
                                los_distance: f.los_distance,
                                in_tree: tree.as_ref().is_some_and(|t| t.contains(&(i, j))),
                            });
                        }
                    }
                }
                let count = edges.iter().filter(|e| e.weight > 0.0).count();
                (controlled.lambda2(), count, edges)
            }
            None => (None, 0, Vec::new()),
        };
        let record = TickRecord {
            tick: self.tick,
            lambda2,
            edge_count,
            los_connected: self.los_connected(&positions),
            robots,
            edges,
            events,
        };
        self.tick += 1;
        Ok(record)
    }

    /// Applies the commands, undoing any step that would end too close to an
    /// obstacle or to another robot. Returns which robots were held.
    fn step(&mut self, positions: &[Vec2], commands: &[Vec2], events: &mut Vec<SimEvent>) -> Vec<bool> {
        let n = positions.len();
        let d_min = self.cfg.constraints.d_coll_min;
        let mut next: Vec<Vec2> = (0..n).map(|i| positions[i] + commands[i] * self.cfg.dt).collect();
        let mut blocker: Vec<Option<Option<usize>>> = vec![None; n];
        for i in 0..n {
            if next[i] != positions[i] && self.world.clearance(next[i]) < d_min {
                next[i] = positions[i];
                blocker[i] = Some(None);
            }
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in i + 1..n {
                    if next[i].distance(next[j]) >= d_min {
                        continue;
                    }
                    for (a, b) in [(i, j), (j, i)] {
                        if next[a] != positions[a] {
                            next[a] = positions[a];
                            blocker[a] = Some(Some(b));
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for i in 0..n {
            if let Some(b) = blocker[i] {
                events.push(SimEvent::StepRejected { robot: i, blocker: b });
            }
            self.robots[i].last_command = if blocker[i].is_some() { Vec2::ZERO } else { commands[i] };
            self.robots[i].position = next[i];
        }
        blocker.iter().map(Option::is_some).collect()
    }

    fn update_targets(&mut self, events: &mut Vec<SimEvent>) {
        let done_at = self.tick + 1;
        for robot in &mut self.robots {
            while let Some(t) = robot.current_target() {
                if robot.position.distance(self.world.targets[t]) > self.cfg.capture_radius + CAPTURE_SLACK {
                    break;
                }
                self.visited[t].get_or_insert(done_at);
                events.push(SimEvent::TargetVisited { robot: robot.id, target: t });
                robot.next += 1;
                robot.path.clear();
                robot.cursor = 0;
            }
            if robot.current_target().is_none() {
                robot.role = Role::Free;
            }
        }
    }

    /// Ground-truth connectivity of the team: pairs within range whose
    /// connecting segment misses every obstacle.
    pub fn los_connected(&self, positions: &[Vec2]) -> bool {
        let n = positions.len();
        let mut sets = petgraph::unionfind::UnionFind::<usize>::new(n);
        let mut unions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if positions[i].distance(positions[j]) <= self.cfg.constraints.d_com_max
                    && self.world.line_of_sight(positions[i], positions[j])
                    && sets.union(i, j)
                {
                    unions += 1;
                }
            }
        }
        unions + 1 >= n
    }
}
