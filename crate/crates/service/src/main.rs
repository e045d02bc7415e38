use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use bnx_service::cli::{run_explain, Assignment, ExplainArgs};
use bnx_service::{router, Mode, Store};
use clap::{Parser, Subcommand};
use tracing::{error, info};

#[derive(Parser)]
#[command(
    name = "bnx",
    version,
    about = "Explain Bayesian network reasoning in words and pictures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain one target given findings and print the result.
    Explain {
        /// Network document (JSON).
        #[arg(long, value_name = "FILE")]
        network: PathBuf,
        #[arg(long, value_name = "NODE=STATE")]
        target: Assignment,
        #[arg(long = "finding", value_name = "NODE=STATE")]
        findings: Vec<Assignment>,
        #[arg(long, default_value = "combined", value_parser = ["verbal", "visual", "combined"])]
        mode: String,
        /// Full set of hypothetical findings to compare against.
        #[arg(long, value_name = "NODE=STATE")]
        whatif: Vec<Assignment>,
        /// Print the whole bundle as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "PORT", default_value_t = 8080)]
        port: u16,
        /// Snapshot file: loaded on start, written on shutdown.
        #[arg(long, value_name = "PATH")]
        persist: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Explain {
            network,
            target,
            findings,
            mode,
            whatif,
            json,
        } => {
            let args = ExplainArgs {
                network,
                target,
                findings,
                mode: mode.parse::<Mode>().expect("clap restricts the values"),
                whatif,
                json,
            };
            match run_explain(&args) {
                Ok(out) => {
                    print!("{out}");
                    let _ = std::io::stdout().flush();
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Serve { host, port, persist } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
                )
                .with_writer(std::io::stderr)
                .init();
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            match runtime.block_on(serve(&host, port, persist)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    error!("{e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

async fn serve(host: &str, port: u16, persist: Option<PathBuf>) -> Result<(), Box<dyn std::error::Error>> {
    let store = match &persist {
        Some(path) => Arc::new(Store::load(path)?),
        None => Arc::new(Store::new()),
    };
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    let addr = listener.local_addr()?;
    println!("listening on {addr}");
    std::io::stdout().flush()?;
    info!(%addr, "serving");

    axum::serve(listener, router(store.clone()))
        .with_graceful_shutdown(shutdown_signal())
        .await?;

    if let Some(path) = &persist {
        store.save(path)?;
        info!(path = %path.display(), "snapshot written");
    }
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
