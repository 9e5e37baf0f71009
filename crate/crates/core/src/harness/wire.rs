//! Frames of the live-session protocol.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::sim::{Role, SimEvent, Simulation, Strategy, TickRecord};

/// Parameters a client may change mid-run.
pub const TUNABLE_PARAMS: [&str; 2] = ["d_los_max", "strategy"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WireError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("parameter `{0}` is not tunable (allowed: d_los_max, strategy)")]
    NotTunable(String),
    #[error("bad value for `{name}`: {reason}")]
    BadValue { name: String, reason: String },
    #[error("no leader robot in this session")]
    NoLeader,
}

/// Client-to-server frames. Unknown fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientFrame {
    /// Leader velocity, m/s.
    Cmd { vx: f64, vy: f64 },
    Param { name: String, value: serde_json::Value },
}

pub fn parse_client_frame(text: &str) -> Result<ClientFrame, WireError> {
    let frame: ClientFrame = serde_json::from_str(text).map_err(|e| WireError::Malformed(e.to_string()))?;
    if let ClientFrame::Cmd { vx, vy } = frame {
        if !(vx.is_finite() && vy.is_finite()) {
            return Err(WireError::Malformed("velocity must be finite".into()));
        }
    }
    Ok(frame)
}

enum Change {
    Command(Vec2),
    DLosMax(f64),
    Strategy(Strategy),
}

fn bad_value(name: &str, reason: impl Into<String>) -> WireError {
    WireError::BadValue {
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn interpret(sim: &Simulation, frame: &ClientFrame) -> Result<Change, WireError> {
    match frame {
        ClientFrame::Cmd { vx, vy } => {
            if sim.leader().is_none() {
                return Err(WireError::NoLeader);
            }
            Ok(Change::Command(Vec2::new(*vx, *vy)))
        }
        ClientFrame::Param { name, value } => match name.as_str() {
            "d_los_max" => {
                let v = value.as_f64().ok_or_else(|| bad_value(name, "expected a number"))?;
                let mut c = sim.config().constraints;
                c.los.d_los_max = v;
                c.validate().map_err(|e| bad_value(name, e.to_string()))?;
                Ok(Change::DLosMax(v))
            }
            "strategy" => {
                let s = value.as_str().ok_or_else(|| bad_value(name, "expected a string"))?;
                Ok(Change::Strategy(s.parse().map_err(|e: String| bad_value(name, e))?))
            }
            other => Err(WireError::NotTunable(other.to_string())),
        },
    }
}

/// Checks a frame against the simulation without applying it.
pub fn check_client_frame(sim: &Simulation, frame: &ClientFrame) -> Result<(), WireError> {
    interpret(sim, frame).map(|_| ())
}

/// Applies a frame to the simulation between ticks.
pub fn apply_client_frame(sim: &mut Simulation, frame: &ClientFrame) -> Result<(), WireError> {
    match interpret(sim, frame)? {
        Change::Command(v) => sim.set_leader_command(v),
        Change::DLosMax(v) => sim.set_d_los_max(v).map_err(|e| bad_value("d_los_max", e.to_string()))?,
        Change::Strategy(s) => sim.set_strategy(s),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRobot {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub in_tree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRegion {
    pub id: usize,
    /// World frame.
    pub vertices: Vec<[f64; 2]>,
}

/// Current values of the tunable parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireParams {
    pub d_los_max: f64,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub tick: u64,
    pub robots: Vec<WireRobot>,
    pub edges: Vec<WireEdge>,
    /// Zero when it does not apply (a single robot).
    pub lambda2: f64,
    pub regions: Vec<WireRegion>,
    pub params: WireParams,
    pub events: Vec<SimEvent>,
}

/// Server-to-client frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerFrame {
    State(StateFrame),
    Error { message: String },
}

impl ServerFrame {
    pub fn error(e: impl std::fmt::Display) -> Self {
        ServerFrame::Error { message: e.to_string() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }
}

/// The frame describing a tick just taken by `sim`. Positions, edges and
/// regions all belong to that tick.
pub fn state_frame(sim: &Simulation, record: &TickRecord) -> StateFrame {
    let regions = sim
        .regions()
        .iter()
        .zip(&record.robots)
        .map(|(region, robot)| WireRegion {
            id: robot.id,
            vertices: region.vertices().iter().map(|v| [v.x + robot.x, v.y + robot.y]).collect(),
        })
        .collect();
    StateFrame {
        tick: record.tick,
        robots: record
            .robots
            .iter()
            .map(|r| WireRobot {
                id: r.id,
                x: r.x,
                y: r.y,
                role: r.role,
            })
            .collect(),
        edges: record
            .edges
            .iter()
            .filter(|e| e.weight > 0.0)
            .map(|e| WireEdge {
                i: e.i,
                j: e.j,
                weight: e.weight,
                in_tree: e.in_tree,
            })
            .collect(),
        lambda2: record.lambda2.unwrap_or(0.0),
        regions,
        params: WireParams {
            d_los_max: sim.config().constraints.los.d_los_max,
            strategy: sim.config().strategy,
        },
        events: record.events.clone(),
    }
}
