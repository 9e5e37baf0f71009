use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{EfficiencyRow, MatrixCell, MetricsLog};
use super::HarnessError;
use crate::connectivity::LosMetric;
use crate::sim::Strategy;

pub const METRICS_SCHEMA: &str = "losnet.metrics/1";

/// Run-level summary written next to the per-tick CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: String,
    pub scenario: String,
    pub seed: u64,
    pub strategy: Strategy,
    pub metric: LosMetric,
    pub r_flip_m: f64,
    pub delta_theta_rad: f64,
    pub d_los_max_m: f64,
    pub ticks: usize,
    pub dt_s: f64,
    pub success: bool,
    pub all_visited: bool,
    pub los_connected: bool,
    pub min_lambda2: Option<f64>,
    pub completion_tick: Option<u64>,
    pub target_completion_ticks: Vec<Option<u64>>,
    pub distance_m: Vec<f64>,
    pub modal_edge_count: Option<usize>,
    pub rejections: usize,
    pub saturations: usize,
}

impl RunSummary {
    pub fn from_log(log: &MetricsLog) -> Self {
        Self {
            schema: METRICS_SCHEMA.into(),
            scenario: log.scenario.clone(),
            seed: log.seed,
            strategy: log.config.strategy,
            metric: log.config.metric,
            r_flip_m: log.config.flip.r_flip,
            delta_theta_rad: log.config.flip.delta_theta,
            d_los_max_m: log.config.constraints.los.d_los_max,
            ticks: log.ticks(),
            dt_s: log.config.dt,
            success: log.success(),
            all_visited: log.all_visited(),
            los_connected: log.los_connected_throughout(),
            min_lambda2: log.min_lambda2(),
            completion_tick: log.completion_tick(),
            target_completion_ticks: log.completion.clone(),
            distance_m: log.total_distance(),
            modal_edge_count: log.modal_edge_count(),
            rejections: log.rejections(),
            saturations: log.saturations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub ticks_csv: PathBuf,
    pub summary: PathBuf,
    pub histogram_csv: PathBuf,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

fn header(out: &mut Vec<u8>, lines: &[String]) {
    for l in lines {
        writeln!(out, "# {l}").expect("write to memory");
    }
}

/// The per-tick CSV: tick, λ₂, edge count, then x, y and speed per robot.
pub fn ticks_csv(log: &MetricsLog) -> Vec<u8> {
    let mut out = Vec::new();
    header(
        &mut out,
        &[
            format!("schema: {METRICS_SCHEMA}"),
            format!(
                "scenario: {}, seed: {}, strategy: {}, metric: {}",
                log.scenario,
                log.seed,
                log.config.strategy.name(),
                log.config.metric.name()
            ),
            "units: tick=count, lambda2=1, edge_count=count, x=m, y=m, speed=m/s".into(),
            "positions are those at the start of the tick; lambda2 is empty for a single robot".into(),
        ],
    );
    let n = log.records.first().map_or(0, |r| r.robots.len());
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["tick".to_string(), "lambda2".into(), "edge_count".into()];
    for k in 0..n {
        head.extend([format!("x{k}"), format!("y{k}"), format!("speed{k}")]);
    }
    w.write_record(&head).expect("write to memory");
    for r in &log.records {
        let mut row = vec![
            r.tick.to_string(),
            r.lambda2.map(|l| l.to_string()).unwrap_or_default(),
            r.edge_count.to_string(),
        ];
        for robot in &r.robots {
            row.extend([robot.x.to_string(), robot.y.to_string(), robot.applied().norm().to_string()]);
        }
        w.write_record(&row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

pub fn histogram_csv(log: &MetricsLog) -> Vec<u8> {
    let mut out = Vec::new();
    header(
        &mut out,
        &[
            format!("schema: {METRICS_SCHEMA}"),
            "maintained edges per tick; ticks sum to the run length".into(),
        ],
    );
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge_count", "ticks"]).expect("write to memory");
    for (k, c) in log.edge_histogram() {
        w.write_record([k.to_string(), c.to_string()]).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

/// Writes `ticks.csv`, `summary.json` and `histogram.csv` into `out_dir`.
pub fn emit_metrics(log: &MetricsLog, out_dir: &Path) -> Result<EmittedFiles, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let files = EmittedFiles {
        ticks_csv: out_dir.join("ticks.csv"),
        summary: out_dir.join("summary.json"),
        histogram_csv: out_dir.join("histogram.csv"),
    };
    let summary = serde_json::to_vec_pretty(&RunSummary::from_log(log)).expect("summary serializes");
    for (path, bytes) in [
        (&files.ticks_csv, ticks_csv(log)),
        (&files.summary, summary),
        (&files.histogram_csv, histogram_csv(log)),
    ] {
        std::fs::write(path, bytes).map_err(|e| io_err(path, e))?;
    }
    Ok(files)
}

/// One row per sweep cell.
pub fn matrix_csv(cells: &[MatrixCell]) -> Vec<u8> {
    let mut out = Vec::new();
    header(
        &mut out,
        &[
            format!("schema: {METRICS_SCHEMA}"),
            "units: r_flip=m, d_los_max=m, completion_tick=count, total_distance=m".into(),
        ],
    );
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "metric",
        "r_flip",
        "d_los_max",
        "seed",
        "success",
        "all_visited",
        "los_connected",
        "min_lambda2",
        "ticks",
        "completion_tick",
        "total_distance",
        "modal_edge_count",
    ])
    .expect("write to memory");
    let opt = |v: Option<String>| v.unwrap_or_default();
    for c in cells {
        w.write_record([
            c.strategy.name().to_string(),
            c.metric.name().to_string(),
            c.r_flip.to_string(),
            c.d_los_max.to_string(),
            c.seed.to_string(),
            c.success.to_string(),
            c.all_visited.to_string(),
            c.los_connected.to_string(),
            opt(c.min_lambda2.map(|v| v.to_string())),
            c.ticks.to_string(),
            opt(c.completion_tick.map(|v| v.to_string())),
            c.total_distance.to_string(),
            opt(c.modal_edge_count.map(|v| v.to_string())),
        ])
        .expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

pub fn efficiency_csv(rows: &[EfficiencyRow]) -> Vec<u8> {
    let mut out = Vec::new();
    header(
        &mut out,
        &[
            format!("schema: {METRICS_SCHEMA}"),
            "units: mean_time=s, mean_distance=m, changes in percent of the baseline".into(),
            "unfinished runs count at the tick limit".into(),
        ],
    );
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "runs",
        "finished",
        "mean_time",
        "mean_distance",
        "time_change_pct",
        "distance_change_pct",
    ])
    .expect("write to memory");
    for r in rows {
        w.write_record([
            r.strategy.name().to_string(),
            r.runs.to_string(),
            r.finished.to_string(),
            r.mean_time.to_string(),
            r.mean_distance.to_string(),
            r.time_change_pct.to_string(),
            r.distance_change_pct.to_string(),
        ])
        .expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

/// Writes sweep results as `matrix.csv`.
pub fn emit_matrix(cells: &[MatrixCell], out_dir: &Path) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let path = out_dir.join("matrix.csv");
    std::fs::write(&path, matrix_csv(cells)).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
