//! HTTP facade over a compiled knowledge base: inspection, phased
//! consultation sessions, rule nodes and surface grids, all as JSON.
//!
//! | Method | Path | |
//! |---|---|---|
//! | GET | `/healthz` | version and knowledge base checksum |
//! | GET | `/api/kb` | variables, diseases, phases, lattice statistics |
//! | POST | `/api/sessions` | new empty session |
//! | GET, DELETE | `/api/sessions/{id}` | session state and audit trail |
//! | POST | `/api/sessions/{id}/fork` | copy of the session's consultation |
//! | POST | `/api/sessions/{id}/phases/{k}` | run phase `k`: `{"inputs": {...}, "mode"?: "..."}` |
//! | GET | `/api/sessions/{id}/report` | consultation report |
//! | GET | `/api/surface` | `disease`, `x`, `y`, `resolution`, `fixed.<attr>` |
//! | GET | `/api/rules` | `attrs=a1,a4`: rules of one lattice node |

mod config;
mod error;
pub mod journal;
mod routes;
pub mod session;
mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use latfuzz_core::KbError;
use thiserror::Error;
use tokio::net::TcpListener;

pub use config::*;
pub use error::{ApiError, RETRY_AFTER_SECS};
pub use routes::{router, DEFAULT_SURFACE_RESOLUTION, MAX_SURFACE_RESOLUTION};
pub use state::{kb_summary, AppState};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}{source}", match path { Some(p) => format!("{}: ", p.display()), None => String::new() })]
    Kb {
        path: Option<PathBuf>,
        source: Box<KbError>,
    },
    #[error("no knowledge base configured (pass a file or set {ENV_KB})")]
    NoKnowledgeBase,
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}, line {line}: {message}", path.display())]
    Journal {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

pub async fn bind(addr: SocketAddr) -> Result<TcpListener, ServiceError> {
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind { addr, source })
}

/// Serve until interrupted.
pub async fn run(
    listener: TcpListener,
    state: Arc<AppState>,
    config: &ServiceConfig,
) -> Result<(), ServiceError> {
    let app = router(state, config.ui_dir.as_deref());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServiceError::Serve)
}

/// Load the knowledge base, replay the journal, bind and serve. Failures to
/// load happen before the socket is opened.
pub async fn serve(config: &ServiceConfig) -> Result<(), ServiceError> {
    let state = Arc::new(AppState::load(config)?);
    let listener = bind(config.socket_addr()?).await?;
    if let Ok(addr) = listener.local_addr() {
        eprintln!("listening on http://{addr}");
    }
    run(listener, state, config).await
}
