use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::wire::{apply_client_frame, ClientFrame};
use super::HarnessError;
use crate::connectivity::LosMetric;
use crate::geometry::Vec2;
use crate::sim::{SimConfig, SimEvent, Simulation, Strategy, TickRecord};

/// Per-run replacements for scenario settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<LosMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_flip: Option<f64>,
    /// Radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_los_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ticks: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut SimConfig) {
        if let Some(s) = self.strategy {
            cfg.strategy = s;
        }
        if let Some(m) = self.metric {
            cfg.metric = m;
        }
        if let Some(r) = self.r_flip {
            cfg.flip.r_flip = r;
        }
        if let Some(d) = self.delta_theta {
            cfg.flip.delta_theta = d;
        }
        if let Some(d) = self.d_los_max {
            cfg.constraints.los.d_los_max = d;
        }
    }
}

/// Builds the simulation a scenario describes for one seed.
pub fn build_simulation(scenario: &Scenario, overrides: &Overrides) -> Result<(Simulation, u64), HarnessError> {
    let seed = overrides.seed.unwrap_or(scenario.seeds[0]);
    let mut cfg = scenario.config.clone();
    overrides.apply(&mut cfg);
    cfg.rng_seed = seed;
    let sim = Simulation::new(scenario.world.realize(seed), &scenario.robots, cfg)?;
    Ok((sim, seed))
}

/// Client frames applied at tick boundaries, keyed by the tick they
/// precede. `span` is how many ticks the recording covered; a replay runs
/// at least that long even once every target is visited.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommandTape {
    pub entries: Vec<TapeEntry>,
    #[serde(default)]
    pub span: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapeEntry {
    pub tick: u64,
    pub frame: ClientFrame,
}

/// Everything recorded about one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub scenario: String,
    pub seed: u64,
    pub config: SimConfig,
    pub max_ticks: u64,
    pub records: Vec<TickRecord>,
    /// Tick count at which each target was first reached.
    pub completion: Vec<Option<u64>>,
}

impl MetricsLog {
    pub fn ticks(&self) -> usize {
        self.records.len()
    }

    pub fn lambda2_trace(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.lambda2).collect()
    }

    pub fn edge_counts(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.edge_count).collect()
    }

    pub fn trajectory(&self, robot: usize) -> Vec<Vec2> {
        self.records.iter().map(|r| r.robots[robot].position()).collect()
    }

    /// Path length per robot, meters.
    pub fn total_distance(&self) -> Vec<f64> {
        let n = self.records.first().map_or(0, |r| r.robots.len());
        let mut d = vec![0.0; n];
        for r in &self.records {
            for (k, robot) in r.robots.iter().enumerate() {
                d[k] += robot.applied().norm() * self.config.dt;
            }
        }
        d
    }

    pub fn all_visited(&self) -> bool {
        self.completion.iter().all(Option::is_some)
    }

    /// Smallest λ₂ over the run, `None` when it never applied.
    pub fn min_lambda2(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.lambda2).reduce(f64::min)
    }

    pub fn los_connected_throughout(&self) -> bool {
        self.records.iter().all(|r| r.los_connected)
    }

    /// All targets visited, λ₂ positive throughout, and the true sight-line
    /// graph never split.
    pub fn success(&self) -> bool {
        self.all_visited() && self.min_lambda2().is_none_or(|l| l > 0.0) && self.los_connected_throughout()
    }

    /// Ticks until the last target was reached.
    pub fn completion_tick(&self) -> Option<u64> {
        if self.all_visited() {
            self.completion.iter().flatten().copied().max()
        } else {
            None
        }
    }

    /// Histogram of per-tick maintained edge counts.
    pub fn edge_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for r in &self.records {
            *h.entry(r.edge_count).or_insert(0) += 1;
        }
        h
    }

    /// Most frequent edge count; ties go to the smaller count.
    pub fn modal_edge_count(&self) -> Option<usize> {
        let h = self.edge_histogram();
        let best = h.values().copied().max()?;
        h.into_iter().find(|&(_, c)| c == best).map(|(k, _)| k)
    }

    pub fn events(&self) -> impl Iterator<Item = (u64, &SimEvent)> {
        self.records.iter().flat_map(|r| r.events.iter().map(move |e| (r.tick, e)))
    }

    pub fn rejections(&self) -> usize {
        self.events().filter(|(_, e)| matches!(e, SimEvent::StepRejected { .. })).count()
    }

    pub fn saturations(&self) -> usize {
        self.events().filter(|(_, e)| matches!(e, SimEvent::GainSaturated { .. })).count()
    }
}

/// Runs a scenario to completion or its tick limit.
pub fn run_experiment(scenario: &Scenario, overrides: &Overrides) -> Result<MetricsLog, HarnessError> {
    run_with_tape(scenario, overrides, &CommandTape::default())
}

/// As [`run_experiment`], feeding recorded client frames in at their ticks.
/// A tape keeps the run going until its last entry even once all targets
/// are visited.
pub fn run_with_tape(scenario: &Scenario, overrides: &Overrides, tape: &CommandTape) -> Result<MetricsLog, HarnessError> {
    let (mut sim, seed) = build_simulation(scenario, overrides)?;
    let max_ticks = overrides.max_ticks.unwrap_or(scenario.max_ticks);
    let span = tape.entries.iter().map(|e| e.tick + 1).fold(tape.span, u64::max);
    let mut records = Vec::new();
    let mut cursor = 0;
    while sim.tick_count() < max_ticks {
        if sim.done() && sim.tick_count() >= span {
            break;
        }
        while let Some(entry) = tape.entries.get(cursor).filter(|e| e.tick <= sim.tick_count()) {
            // Frames that failed live were rejected there as well.
            let _ = apply_client_frame(&mut sim, &entry.frame);
            cursor += 1;
        }
        records.push(sim.tick()?);
    }
    Ok(MetricsLog {
        scenario: scenario.name.clone(),
        seed,
        config: sim.config().clone(),
        max_ticks,
        records,
        completion: sim.visited().to_vec(),
    })
}

/// Axes of a batch sweep. Empty axes fall back to the scenario's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    #[serde(default)]
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub metrics: Vec<LosMetric>,
    #[serde(default)]
    pub r_flips: Vec<f64>,
    #[serde(default)]
    pub d_los_maxes: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

/// Outcome of one run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub strategy: Strategy,
    pub metric: LosMetric,
    pub r_flip: f64,
    pub d_los_max: f64,
    pub seed: u64,
    pub success: bool,
    pub all_visited: bool,
    pub los_connected: bool,
    pub min_lambda2: Option<f64>,
    pub ticks: usize,
    pub completion_tick: Option<u64>,
    pub total_distance: f64,
    pub modal_edge_count: Option<usize>,
}

impl MatrixCell {
    pub fn from_log(log: &MetricsLog) -> Self {
        Self {
            strategy: log.config.strategy,
            metric: log.config.metric,
            r_flip: log.config.flip.r_flip,
            d_los_max: log.config.constraints.los.d_los_max,
            seed: log.seed,
            success: log.success(),
            all_visited: log.all_visited(),
            los_connected: log.los_connected_throughout(),
            min_lambda2: log.min_lambda2(),
            ticks: log.ticks(),
            completion_tick: log.completion_tick(),
            total_distance: log.total_distance().iter().sum(),
            modal_edge_count: log.modal_edge_count(),
        }
    }
}

fn or_default<T: Clone>(axis: &[T], fallback: T) -> Vec<T> {
    if axis.is_empty() {
        vec![fallback]
    } else {
        axis.to_vec()
    }
}

/// Every combination of the spec's axes, run in parallel. Cells come back
/// in axis order regardless of scheduling.
pub fn run_matrix(scenario: &Scenario, spec: &MatrixSpec) -> Result<Vec<MatrixCell>, HarnessError> {
    let strategies = or_default(&spec.strategies, scenario.config.strategy);
    let metrics = or_default(&spec.metrics, scenario.config.metric);
    let r_flips = or_default(&spec.r_flips, scenario.config.flip.r_flip);
    let d_los = or_default(&spec.d_los_maxes, scenario.config.constraints.los.d_los_max);
    let seeds = if spec.seeds.is_empty() { scenario.seeds.clone() } else { spec.seeds.clone() };
    let mut runs = Vec::new();
    for &strategy in &strategies {
        for &metric in &metrics {
            for &r_flip in &r_flips {
                for &d_los_max in &d_los {
                    for &seed in &seeds {
                        runs.push(Overrides {
                            strategy: Some(strategy),
                            metric: Some(metric),
                            r_flip: Some(r_flip),
                            d_los_max: Some(d_los_max),
                            seed: Some(seed),
                            ..Overrides::default()
                        });
                    }
                }
            }
        }
    }
    runs.par_iter()
        .map(|o| run_experiment(scenario, o).map(|log| MatrixCell::from_log(&log)))
        .collect()
}

/// Mean completion time and path length of one strategy, with the change
/// relative to a baseline (negative is better).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub strategy: Strategy,
    pub runs: usize,
    pub finished: usize,
    /// Seconds; unfinished runs count at the tick limit.
    pub mean_time: f64,
    /// Meters, summed over the team.
    pub mean_distance: f64,
    pub time_change_pct: f64,
    pub distance_change_pct: f64,
}

/// Summarizes matrix cells per strategy against `baseline`.
pub fn efficiency_report(cells: &[MatrixCell], baseline: Strategy, dt: f64, max_ticks: u64) -> Vec<EfficiencyRow> {
    let mut order: Vec<Strategy> = Vec::new();
    for c in cells {
        if !order.contains(&c.strategy) {
            order.push(c.strategy);
        }
    }
    let stats = |s: Strategy| {
        let runs: Vec<&MatrixCell> = cells.iter().filter(|c| c.strategy == s).collect();
        let n = runs.len().max(1) as f64;
        let time = runs.iter().map(|c| c.completion_tick.unwrap_or(max_ticks) as f64 * dt).sum::<f64>() / n;
        let dist = runs.iter().map(|c| c.total_distance).sum::<f64>() / n;
        (runs.len(), runs.iter().filter(|c| c.all_visited).count(), time, dist)
    };
    let (_, _, base_time, base_dist) = stats(baseline);
    order
        .into_iter()
        .map(|s| {
            let (runs, finished, time, dist) = stats(s);
            EfficiencyRow {
                strategy: s,
                runs,
                finished,
                mean_time: time,
                mean_distance: dist,
                time_change_pct: 100.0 * (time - base_time) / base_time,
                distance_change_pct: 100.0 * (dist - base_dist) / base_dist,
            }
        })
        .collect()
}
