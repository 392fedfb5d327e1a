use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;

use choreo_server::{ServerConfig, Service};

/// Serve a cue sheet to the operator console.
#[derive(Parser)]
#[command(name = "choreo-serve", version)]
struct Args {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cue sheet; overrides the config file.
    #[arg(long)]
    cue_sheet: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_env_filter(tracing_subscriber::EnvFilter::from_default_env()).init();
    let args = Args::parse();
    let mut cfg = ServerConfig::load(args.config.as_deref())?;
    cfg.apply_env(|k| std::env::var(k).ok())?;
    if let Some(s) = args.cue_sheet {
        cfg.cue_sheet = Some(s);
    }
    if let Some(p) = args.port {
        cfg.port = p;
    }
    let service = Service::from_config(&cfg)?;
    let addr = format!("{}:{}", cfg.bind, cfg.port);
    let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("binding {addr}"))?;
    tracing::info!("listening on {addr}");
    axum::serve(listener, service.router.clone())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    drop(service);
    Ok(())
}
