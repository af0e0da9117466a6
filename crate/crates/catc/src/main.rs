use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use catc::format::{self, FormatError};
use catc::gateway::Gateway;
use catc_core::sim::{run_scenario, EventKind};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "catc",
    version,
    about = "Conflicting runway clearance detection on an airport segment graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an airport file.
    Validate { airport: PathBuf },
    /// Run a scenario and write its event log as JSON lines.
    Run {
        airport: PathBuf,
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_ticks: u64,
        /// Log file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the message protocol over WebSocket.
    Serve {
        airport: PathBuf,
        #[arg(long, default_value_t = 8765)]
        port: u16,
        /// Scenario queued before the first connection.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

const VALIDATION_FAILED: u8 = 2;
const SCENARIO_FAILED: u8 = 3;

fn load_airport(path: &Path) -> Result<catc_core::AirportModel, ExitCode> {
    format::load_airport(path).map_err(|e| {
        match &e {
            FormatError::Invalid(v) => {
                eprintln!("{}: invalid airport", path.display());
                for violation in &v.violations {
                    eprintln!("  {violation}");
                }
            }
            other => eprintln!("{}: {other}", path.display()),
        }
        ExitCode::from(VALIDATION_FAILED)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { airport } => match load_airport(&airport) {
            Ok(model) => {
                println!(
                    "{}: ok, {} segments, {} runways",
                    airport.display(),
                    model.segments().count(),
                    model.runways().count()
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run {
            airport,
            scenario,
            max_ticks,
            out,
        } => {
            let model = match load_airport(&airport) {
                Ok(m) => m,
                Err(code) => return code,
            };
            let commands = match format::load_scenario(&scenario) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", scenario.display());
                    return ExitCode::from(SCENARIO_FAILED);
                }
            };
            let log = run_scenario(Arc::new(model), &commands, max_ticks);
            let text = format::event_log(&log);
            match &out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("{}: {e}", path.display());
                        return ExitCode::FAILURE;
                    }
                }
                None => print!("{text}"),
            }
            let errors = log.iter().filter(|e| matches!(e.kind, EventKind::Error { .. })).count();
            if errors > 0 {
                eprintln!("{errors} scenario error(s)");
                ExitCode::from(SCENARIO_FAILED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Serve {
            airport,
            port,
            scenario,
        } => {
            let model = match load_airport(&airport) {
                Ok(m) => m,
                Err(code) => return code,
            };
            let mut gateway = Gateway::new(Arc::new(model));
            if let Some(path) = scenario {
                match format::load_scenario(&path) {
                    Ok(c) => gateway.simulator_mut().schedule(c),
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        return ExitCode::from(SCENARIO_FAILED);
                    }
                }
            }
            match serve(gateway, port) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("{e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn serve(gateway: Gateway, port: u16) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .with_context(|| format!("binding port {port}"))?;
        log::info!("listening on ws://{}", listener.local_addr()?);
        catc::server::serve(listener, gateway).await?;
        Ok(())
    })
}
