use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use sic_service::{router, ServiceConfig, SessionService};

/// Serve training sessions over HTTP.
#[derive(Debug, Parser)]
#[command(name = "sic-serve", version)]
struct Args {
    /// TOML config file. `SIC_*` environment variables override it.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Print the effective config as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

async fn shutdown() {
    let _ = tokio::signal::ctrl_c().await;
    tracing::info!("shutting down");
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let args = Args::parse();
    let config = match ServiceConfig::load(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sic-serve: {e}");
            return ExitCode::from(2);
        }
    };
    if args.print_config {
        let mut shown = config.clone();
        if shown.api_key.is_some() {
            shown.api_key = Some("<redacted>".into());
        }
        print!("{}", toml::to_string_pretty(&shown).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    let service = match SessionService::from_config(&config) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("sic-serve: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(&config.bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("sic-serve: binding {}: {e}", config.bind);
            return ExitCode::from(1);
        }
    };
    tracing::info!(addr = %config.bind, mock = config.provider.mock, "listening");
    let app = router(service, config.api_key.clone());
    if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(shutdown()).await {
        eprintln!("sic-serve: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
