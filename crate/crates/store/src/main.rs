use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use mrpp_store::{http, ServiceConfig, Store};

/// Serve the policy registry, catalog search and alert feeds over HTTP.
#[derive(Parser)]
#[command(name = "mrpp-store", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "MRPP_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Directory holding policies, catalog, profiles and alerts.
    #[arg(long, env = "MRPP_DATA_DIR", default_value = "./mrpp-data")]
    data_dir: PathBuf,
    /// JSON file overriding badge boosts and rating weights.
    #[arg(long, env = "MRPP_CONFIG")]
    config: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> std::process::ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let args = Args::parse();

    let config = match &args.config {
        Some(path) => match ServiceConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                tracing::error!("config: {e}");
                return std::process::ExitCode::from(2);
            }
        },
        None => ServiceConfig::default(),
    };
    let store = match Store::open(&args.data_dir, config) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            tracing::error!("cannot open {}: {e}", args.data_dir.display());
            return std::process::ExitCode::from(3);
        }
    };
    let listener = match tokio::net::TcpListener::bind(args.listen).await {
        Ok(l) => l,
        Err(e) => {
            tracing::error!("cannot listen on {}: {e}", args.listen);
            return std::process::ExitCode::from(3);
        }
    };
    tracing::info!("serving {} on {}", args.data_dir.display(), args.listen);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, http::router(store)).with_graceful_shutdown(shutdown).await {
        tracing::error!("server error: {e}");
        return std::process::ExitCode::from(1);
    }
    std::process::ExitCode::SUCCESS
}
