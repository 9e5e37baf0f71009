//! Simulated world and the per-tick control loop.

mod control;
mod engine;
mod world;

use thiserror::Error;

use crate::connectivity::ConnectivityError;
use crate::geometry::{GeometryError, Vec2};
use crate::topology::TopologyError;

pub use control::{clamp_norm, navigation_velocity, remove_neighbor_points, NavParams};
pub use engine::{
    EdgeRecord, RobotRecord, RobotSpec, RobotState, Role, SimConfig, SimEvent, Simulation, Strategy, TickRecord,
};
pub use world::{clutter_world, raycast_lidar, ClutterSpec, GridPlanner, WorldModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("obstacle {0} is not a simple polygon with at least three vertices")]
    BadObstacle(usize),
    #[error("target {0} lies inside an obstacle")]
    TargetInObstacle(usize),
    #[error("pose {0:?} lies inside an obstacle")]
    PoseInObstacle(Vec2),
    #[error("robot {robot} is assigned unknown target {target}")]
    UnknownTarget { robot: usize, target: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("one-hop audit failed for robot {robot}: global {global:?}, local {local:?}")]
    AuditMismatch { robot: usize, global: Vec2, local: Vec2 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}
