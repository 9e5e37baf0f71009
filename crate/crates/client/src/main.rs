use std::net::SocketAddr;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use losnet_client::{Client, ClientError};
use losnet_core::connectivity::LosMetric;
use losnet_core::harness::api::{MatrixRequest, RunRequest, ScenarioRef};
use losnet_core::harness::{MatrixSpec, Overrides, Scenario};
use losnet_core::sim::Strategy;
use losnet_service::ServiceConfig;

/// Experiments on line-of-sight connectivity maintenance.
#[derive(Parser)]
#[command(name = "losnet", version)]
struct Cli {
    /// Service to talk to. Without it an in-process service is started.
    #[arg(long, global = true, env = "LOSNET_SERVER")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its summary.
    Run {
        /// Builtin scenario name or scenario file.
        scenario: String,
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_ticks: Option<u64>,
    },
    /// Sweep strategies, metrics, r_flip, d_los_max and seeds.
    Matrix {
        scenario: String,
        /// Comma-separated strategies.
        #[arg(long, value_delimiter = ',')]
        strategy: Vec<Strategy>,
        #[arg(long, value_delimiter = ',')]
        metric: Vec<LosMetric>,
        #[arg(long, value_delimiter = ',')]
        r_flip: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        d_los_max: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
        /// Strategy the efficiency table compares against.
        #[arg(long, default_value = "fixed-topology")]
        baseline: Strategy,
        #[arg(long)]
        out_dir: Option<String>,
    },
    /// Run the service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Scenario for live sessions that do not name one.
        #[arg(long)]
        session_scenario: Option<String>,
    },
    /// Check a scenario file.
    Validate { scenario: String },
}

#[derive(Args)]
struct Knobs {
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    metric: Option<LosMetric>,
    /// Flipping radius, meters.
    #[arg(long)]
    r_flip: Option<f64>,
    /// Interpolation step, degrees.
    #[arg(long = "delta-theta")]
    delta_theta: Option<f64>,
    /// Meters.
    #[arg(long)]
    d_los_max: Option<f64>,
    #[arg(long)]
    out_dir: Option<String>,
}

/// Files are sent by content so a remote service can read them.
fn scenario_ref(arg: &str) -> Result<ScenarioRef> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        Ok(ScenarioRef::Toml(text))
    } else {
        Ok(ScenarioRef::Builtin(arg.to_string()))
    }
}

async fn client(server: Option<String>) -> Result<Client> {
    match server {
        Some(url) => Ok(Client::new(url)),
        None => {
            let addr = losnet_service::spawn(([127, 0, 0, 1], 0).into(), ServiceConfig::default()).await?;
            Ok(Client::new(format!("http://{addr}")))
        }
    }
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

async fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Serve { addr, session_scenario } => {
            let session_scenario = match session_scenario {
                Some(s) => Some(match scenario_ref(&s)? {
                    ScenarioRef::Toml(text) => Scenario::from_toml(&text).map_err(|e| anyhow::anyhow!("{s}: {e}"))?,
                    r => r.resolve().map_err(|e| anyhow::anyhow!("{e}"))?,
                }),
                None => None,
            };
            let listener = tokio::net::TcpListener::bind(addr).await?;
            println!("serving on http://{}", listener.local_addr()?);
            losnet_service::serve(listener, ServiceConfig { session_scenario }).await?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { scenario } => {
            let c = client(cli.server).await?;
            match c.validate(scenario_ref(&scenario)?).await {
                Ok(v) => {
                    println!(
                        "{scenario}: ok ({}, {} robots, {} targets, seeds {:?})",
                        v.name, v.robots, v.targets, v.seeds
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(ClientError::Api { body, .. }) => {
                    eprintln!("{scenario}: {}", body.error);
                    Ok(ExitCode::FAILURE)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Run {
            scenario,
            knobs,
            seed,
            max_ticks,
        } => {
            let c = client(cli.server).await?;
            let req = RunRequest {
                scenario: scenario_ref(&scenario)?,
                overrides: Overrides {
                    strategy: knobs.strategy,
                    metric: knobs.metric,
                    r_flip: knobs.r_flip,
                    delta_theta: knobs.delta_theta.map(f64::to_radians),
                    d_los_max: knobs.d_los_max,
                    seed,
                    max_ticks,
                },
                out_dir: knobs.out_dir,
            };
            let resp = c.run(&req).await?;
            let s = &resp.summary;
            println!(
                "{} seed={} strategy={} metric={} success={} ticks={} completion={} min_lambda2={} distance={:.2}m modal_edges={}",
                s.scenario,
                s.seed,
                s.strategy.name(),
                s.metric.name(),
                s.success,
                s.ticks,
                fmt_opt(s.completion_tick),
                fmt_opt(s.min_lambda2.map(|l| format!("{l:.4}"))),
                s.distance_m.iter().sum::<f64>(),
                fmt_opt(s.modal_edge_count),
            );
            for f in &resp.files {
                println!("wrote {f}");
            }
            Ok(if s.success { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Matrix {
            scenario,
            strategy,
            metric,
            r_flip,
            d_los_max,
            seed,
            baseline,
            out_dir,
        } => {
            let c = client(cli.server).await?;
            let req = MatrixRequest {
                scenario: scenario_ref(&scenario)?,
                spec: MatrixSpec {
                    strategies: strategy,
                    metrics: metric,
                    r_flips: r_flip,
                    d_los_maxes: d_los_max,
                    seeds: seed,
                },
                baseline: Some(baseline),
                out_dir,
            };
            let resp = c.matrix(&req).await?;
            println!("strategy        metric        r_flip  d_los_max  seed  success  ticks  min_lambda2");
            for cell in &resp.cells {
                println!(
                    "{:<15} {:<13} {:>6}  {:>9}  {:>4}  {:<7}  {:>5}  {}",
                    cell.strategy.name(),
                    cell.metric.name(),
                    cell.r_flip,
                    cell.d_los_max,
                    cell.seed,
                    if cell.success { "yes" } else { "no" },
                    cell.ticks,
                    fmt_opt(cell.min_lambda2.map(|l| format!("{l:.4}"))),
                );
            }
            println!();
            for row in &resp.efficiency {
                println!(
                    "{:<15} runs={} finished={} mean_time={:.1}s ({:+.1}%) mean_distance={:.1}m ({:+.1}%)",
                    row.strategy.name(),
                    row.runs,
                    row.finished,
                    row.mean_time,
                    row.time_change_pct,
                    row.mean_distance,
                    row.distance_change_pct,
                );
            }
            for f in &resp.files {
                println!("wrote {f}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match execute(Cli::parse()).await {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
