//! HTTP service around the explanation pipeline: sessions hold a model and
//! its current plan, take suggestions, and commit accepted ones as the next
//! iteration.

pub mod api;
pub mod config;
pub mod error;
pub mod session;
pub mod store;

use std::sync::Arc;

pub use api::{router, AppState};
pub use config::{ConfigError, ServiceConfig};
pub use error::ApiError;
pub use session::{HistoryEntry, Outcome, Session};
pub use store::{SessionStore, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Restores the snapshot if one exists, serves until Ctrl-C, then writes
/// the snapshot back.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let addr = config.listen_addr()?;
    let store = Arc::new(SessionStore::new());
    if let Some(path) = &config.snapshot {
        if path.exists() {
            let n = store.restore(path)?;
            tracing::info!("restored {n} session(s) from {}", path.display());
        }
    }
    let app = router(AppState::new(store.clone(), config.snapshot.clone()));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(path) = &config.snapshot {
        let n = store.snapshot(path)?;
        tracing::info!("saved {n} session(s) to {}", path.display());
    }
    Ok(())
}
