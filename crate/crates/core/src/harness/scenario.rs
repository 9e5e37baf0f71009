use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::geometry::{Aabb, Polygon, Vec2};
use crate::sim::{clutter_world, ClutterSpec, RobotSpec, SimConfig, SimError, Simulation, WorldModel};

pub const SCENARIO_SCHEMA: &str = "losnet.scenario/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { line: Option<usize>, message: String },
    #[error("cannot read scenario: {0}")]
    Io(String),
}

impl ScenarioError {
    fn invalid(line: Option<usize>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            line,
            message: message.into(),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Parse { line, .. } => Some(*line),
            ScenarioError::Invalid { line, .. } => *line,
            ScenarioError::Io(_) => None,
        }
    }
}

/// Unit annotations carried in the scenario header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    pub length: String,
    pub time: String,
    pub angle: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            length: "m".into(),
            time: "s".into(),
            angle: "rad".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleDef {
    pub vertices: Vec<Vec2>,
}

/// Random convex clutter added on top of the listed obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClutterDef {
    pub obstacle_count: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    pub min_gap: f64,
    /// `[[x, y], radius]` discs kept free of clutter.
    #[serde(default)]
    pub keep_out: Vec<(Vec2, f64)>,
}

/// Targets drawn uniformly from a square, appended after the listed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetArea {
    pub center: Vec2,
    pub half_extent: f64,
    pub count: usize,
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldDef {
    pub bounds: Aabb,
    #[serde(default)]
    pub targets: Vec<Vec2>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clutter: Option<ClutterDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_area: Option<TargetArea>,
}

const TARGET_STREAM: u64 = 0x5eed;

impl WorldDef {
    /// The concrete world for one seed. Fixed parts are identical for every
    /// seed.
    pub fn realize(&self, seed: u64) -> WorldModel {
        let mut targets = self.targets.clone();
        if let Some(area) = &self.target_area {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TARGET_STREAM);
            let h = area.half_extent;
            let mut drawn: Vec<Vec2> = Vec::with_capacity(area.count);
            for _ in 0..area.count * 1000 {
                if drawn.len() == area.count {
                    break;
                }
                let t = area.center + Vec2::new(rng.random_range(-h..h), rng.random_range(-h..h));
                if drawn.iter().all(|o| o.distance(t) > area.min_separation) {
                    drawn.push(t);
                }
            }
            targets.extend(drawn);
        }
        let mut obstacles: Vec<Polygon> = self.obstacles.iter().map(|o| Polygon::new(o.vertices.clone())).collect();
        if let Some(c) = &self.clutter {
            let spec = ClutterSpec {
                bounds: self.bounds,
                obstacle_count: c.obstacle_count,
                min_radius: c.min_radius,
                max_radius: c.max_radius,
                min_gap: c.min_gap,
                keep_out: c.keep_out.clone(),
            };
            obstacles.extend(clutter_world(&spec, seed).obstacles);
        }
        WorldModel {
            obstacles,
            bounds: self.bounds,
            targets,
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub units: Units,
    pub max_ticks: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub world: WorldDef,
    pub robots: Vec<RobotSpec>,
    #[serde(default)]
    pub config: SimConfig,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Deserialize)]
struct Locations {
    #[serde(default)]
    robots: Vec<Spanned<toml::Value>>,
    #[serde(default)]
    world: Option<WorldLocations>,
    #[serde(default)]
    units: Option<Spanned<toml::Value>>,
}

#[derive(Deserialize)]
struct WorldLocations {
    #[serde(default)]
    targets: Vec<Spanned<toml::Value>>,
    #[serde(default)]
    obstacles: Vec<Spanned<toml::Value>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Scenario {
    /// Parses and validates scenario text.
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => {
                    let line = line_of(text, span.start);
                    let line_start = text[..span.start].rfind('\n').map_or(0, |k| k + 1);
                    (line, span.start - line_start + 1)
                }
                None => (1, 1),
            };
            ScenarioError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        let locations: Option<Locations> = toml::from_str(text).ok();
        let locate = |what: Locate| -> Option<usize> {
            let loc = locations.as_ref()?;
            let span = match what {
                Locate::Robot(k) => loc.robots.get(k)?.span(),
                Locate::Target(k) => loc.world.as_ref()?.targets.get(k)?.span(),
                Locate::Obstacle(k) => loc.world.as_ref()?.obstacles.get(k)?.span(),
                Locate::Units => loc.units.as_ref()?.span(),
            };
            Some(line_of(text, span.start))
        };
        scenario.check(locate)?;
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Validates an in-memory scenario.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.check(|_| None)
    }

    fn check(&self, locate: impl Fn(Locate) -> Option<usize>) -> Result<(), ScenarioError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(ScenarioError::invalid(
                Some(1),
                format!("unsupported schema `{}` (expected `{SCENARIO_SCHEMA}`)", self.schema),
            ));
        }
        if self.units != Units::default() {
            return Err(ScenarioError::invalid(
                locate(Locate::Units),
                "units must be length = \"m\", time = \"s\", angle = \"rad\"",
            ));
        }
        if self.robots.is_empty() {
            return Err(ScenarioError::invalid(None, "scenario has no robots"));
        }
        if self.seeds.is_empty() {
            return Err(ScenarioError::invalid(None, "seed list is empty"));
        }
        if self.robots.iter().filter(|r| r.leader).count() > 1 {
            return Err(ScenarioError::invalid(None, "at most one robot may be the leader"));
        }
        if let Some(area) = &self.world.target_area {
            if !(area.half_extent > 0.0) {
                return Err(ScenarioError::invalid(None, "target_area.half_extent must be positive"));
            }
        }
        self.config
            .validate()
            .map_err(|e| ScenarioError::invalid(None, format!("config: {e}")))?;
        let fixed_targets = self.world.targets.len();
        for &seed in &self.seeds {
            let world = self.world.realize(seed);
            if let Some(area) = &self.world.target_area {
                if world.targets.len() != fixed_targets + area.count {
                    return Err(ScenarioError::invalid(
                        None,
                        format!("seed {seed}: could not place {} separated targets", area.count),
                    ));
                }
            }
            let sim = Simulation::new(world, &self.robots, self.config.clone()).map_err(|e| {
                let line = match &e {
                    SimError::BadObstacle(k) => locate(Locate::Obstacle(*k)),
                    SimError::TargetInObstacle(k) => locate(Locate::Target(*k)),
                    SimError::UnknownTarget { robot, .. } => locate(Locate::Robot(*robot)),
                    SimError::PoseInObstacle(p) => self
                        .robots
                        .iter()
                        .position(|r| r.start == *p)
                        .and_then(|k| locate(Locate::Robot(k))),
                    _ => None,
                };
                ScenarioError::invalid(line, format!("seed {seed}: {e}"))
            })?;
            if self.robots.len() >= 2 {
                let lambda2 = sim
                    .current_lambda2()
                    .map_err(|e| ScenarioError::invalid(None, format!("seed {seed}: {e}")))?;
                if !lambda2.is_some_and(|l| l > 0.0) {
                    return Err(ScenarioError::invalid(
                        locate(Locate::Robot(0)),
                        format!("seed {seed}: initial graph disconnected"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Locate {
    Robot(usize),
    Target(usize),
    Obstacle(usize),
    Units,
}

/// Scenarios shipped with the crate.
pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    let text = match name {
        "clutter-4" => include_str!("../../scenarios/clutter-4.toml"),
        "efficiency-4" => include_str!("../../scenarios/efficiency-4.toml"),
        "open-2" => include_str!("../../scenarios/open-2.toml"),
        "teleop-3" => include_str!("../../scenarios/teleop-3.toml"),
        _ => return None,
    };
    Some(Scenario::from_toml(text).expect("builtin scenario is valid"))
}

pub const BUILTIN_SCENARIOS: [&str; 4] = ["clutter-4", "efficiency-4", "open-2", "teleop-3"];
