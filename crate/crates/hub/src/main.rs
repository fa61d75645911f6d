use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anyhow::Context;
use cbrne_hub::api::{router, SharedHub};
use cbrne_hub::config::CONFIG_ENV;
use cbrne_hub::log::read_log;
use cbrne_hub::sim::{knowledge_for, load_scenario, scenario_config};
use cbrne_hub::{run_headless, EventLog, Hub, RunOptions, Simulation};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hub", about = "Incident decision hub and scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Serve the HTTP API while the scenario plays out in real time.
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Event log file.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Simulated seconds per wall-clock second.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
    /// Run a scenario headless and write a report.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
        /// Event log file.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Rebuild the final snapshot from an event log and print it.
    Replay {
        #[arg(long)]
        log: PathBuf,
        /// Scenario that supplies the scene origin and hub settings.
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn config_override() -> Option<PathBuf> {
    std::env::var_os(CONFIG_ENV).map(PathBuf::from)
}

fn run(scenario: &Path, steps: u64, seed: Option<u64>, report: &Path, log: Option<PathBuf>) -> anyhow::Result<()> {
    let options = RunOptions { steps, seed, log, config: config_override() };
    let (summary, _) = run_headless(scenario, &options)?;
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    std::fs::write(report, text).with_context(|| format!("writing {}", report.display()))?;
    eprintln!(
        "{} steps, coverage {:.1}%, most probable {:?}, {} events",
        summary.steps, summary.coverage_pct, summary.most_probable.category, summary.event_count
    );
    Ok(())
}

fn replay(log: &Path, scenario_path: &Path) -> anyhow::Result<()> {
    let scenario = load_scenario(scenario_path)?;
    let config = scenario_config(&scenario, scenario_path, config_override().as_deref())?;
    let knowledge = knowledge_for(&scenario, &config)?;
    let hub = Hub::replay(knowledge, read_log(log)?)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(&hub.snapshot())?)?;
    Ok(())
}

async fn serve(scenario_path: &Path, seed: Option<u64>, port: u16, log: Option<PathBuf>, speed: f64) -> anyhow::Result<()> {
    anyhow::ensure!(speed.is_finite() && speed > 0.0, "--speed must be positive");
    let scenario = load_scenario(scenario_path)?;
    let config = scenario_config(&scenario, scenario_path, config_override().as_deref())?;
    let knowledge = knowledge_for(&scenario, &config)?;
    let mut sim = Simulation::new(scenario, seed)?;
    let log = match log.as_ref().or(config.log.as_ref()) {
        Some(path) => EventLog::create(path)?,
        None => EventLog::in_memory(),
    };
    let hub: SharedHub = Arc::new(Mutex::new(Hub::new(knowledge, sim.seed(), log)));
    sim.start(&mut hub.lock().expect("hub lock"))?;

    let ticker = hub.clone();
    let period = Duration::from_secs_f64(sim.dt_s() / speed);
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(period);
        loop {
            interval.tick().await;
            let mut hub = ticker.lock().expect("hub lock");
            if let Err(e) = sim.step(&mut hub) {
                eprintln!("simulation stopped: {e}");
                return;
            }
        }
    });

    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    eprintln!("hub listening on http://{addr}");
    axum::serve(listener, router(hub)).await?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run { scenario, steps, seed, report, log } => run(&scenario, steps, seed, &report, log),
        Cmd::Replay { log, scenario } => replay(&log, &scenario),
        Cmd::Serve { scenario, seed, port, log, speed } => tokio::runtime::Runtime::new()
            .context("starting runtime")
            .and_then(|rt| rt.block_on(serve(&scenario, seed, port, log, speed))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
