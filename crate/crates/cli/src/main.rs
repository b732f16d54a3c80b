//! `cascadetrack`: runs the tracker over MOT-style detection files, scores
//! results and renders overlays. Every command talks to the HTTP service;
//! without `--server` an in-process server on a free local port is used.

mod commands;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use cascadetrack_client::Client;
use cascadetrack_core::gate_check::DEFAULT_SAMPLES;
use clap::{Parser, Subcommand};

use crate::commands::TrackArgs;
use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "cascadetrack", version, about)]
struct Cli {
    /// Service base URL, e.g. http://127.0.0.1:8080. Defaults to an
    /// embedded server.
    #[arg(long, global = true)]
    server: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track a detection sequence and write MOT-style results.
    Track {
        #[arg(long)]
        detections: PathBuf,
        /// DSFT feature file, one row per detection line.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// JSON object overriding tracker settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Score results against ground truth (CLEAR-MOT).
    Evaluate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        result: PathBuf,
        /// Report path; standard output if omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the Mahalanobis gate against its nominal 95% coverage.
    GateCheck {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw tracks as one SVG per frame.
    Render {
        #[arg(long)]
        result: PathBuf,
        /// Canvas size as WIDTHxHEIGHT.
        #[arg(long, value_parser = parse_frame_size)]
        frame_size: (u32, u32),
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the layer output shapes of the descriptor network.
    Network,
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

fn parse_frame_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u32>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("invalid frame size {s:?}"))
    };
    Ok((parse(w)?, parse(h)?))
}

async fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::Serve { addr } = &cli.command {
        tracing_subscriber::fmt()
            .with_env_filter(
                tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
            )
            .with_writer(std::io::stderr)
            .init();
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::io(addr, e))?;
        let local = listener.local_addr().map_err(|e| Failure::io(addr, e))?;
        eprintln!("listening on http://{local}");
        return cascadetrack_service::serve(listener)
            .await
            .map_err(|e| Failure::io("server", e));
    }

    // Keeps an embedded server alive until the command finishes.
    let (client, _embedded) = match cli.server {
        Some(url) => (Client::new(url), None),
        None => {
            let server = cascadetrack_service::spawn("127.0.0.1:0")
                .await
                .map_err(|e| Failure::io("embedded server", e))?;
            (Client::new(server.base_url()), Some(server))
        }
    };

    match cli.command {
        Command::Track {
            detections,
            features,
            output,
            config,
            manifest,
        } => {
            let args = TrackArgs {
                detections,
                features,
                output,
                config,
                manifest,
            };
            commands::track(&client, args).await
        }
        Command::Evaluate { gt, result, report } => commands::evaluate(&client, &gt, &result, report.as_deref()).await,
        Command::GateCheck { samples, seed } => commands::gate_check(&client, samples, seed).await,
        Command::Render {
            result,
            frame_size,
            out_dir,
        } => commands::render(&client, &result, frame_size, &out_dir).await,
        Command::Network => commands::network(&client).await,
        Command::Serve { .. } => unreachable!("handled above"),
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_sizes() {
        assert_eq!(parse_frame_size("640x480"), Ok((640, 480)));
        assert_eq!(parse_frame_size("1920X1080"), Ok((1920, 1080)));
        assert!(parse_frame_size("640").is_err());
        assert!(parse_frame_size("0x10").is_err());
        assert!(parse_frame_size("ax10").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
