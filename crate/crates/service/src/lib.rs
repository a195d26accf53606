//! HTTP JSON API over the maturity engine, plus optional static UI assets.
//!
//! Every mutation goes through [`ccmf_core::Store`] before the response is
//! sent. Errors are problem documents `{status, code, message, details}`.

mod api;
pub mod problem;

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;

use axum::http::StatusCode;
use axum::Router;
use ccmf_core::{Store, StoreError};
use thiserror::Error;
use tower_http::services::ServeDir;

pub use api::{api_router, AppState};
pub use problem::Problem;

pub const DEFAULT_PORT: u16 = 8787;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub store_root: PathBuf,
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(store_root: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            store_root: store_root.into(),
            static_dir: None,
        }
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("port must be in 1..65535")]
    InvalidPort,
    #[error("static directory {0} does not exist")]
    MissingStaticDir(PathBuf),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("server error: {0}")]
    Serve(#[source] std::io::Error),
}

/// The full application: API routes, then static assets or a 404 problem.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = api_router(state);
    match static_dir {
        Some(dir) => {
            api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true))
        }
        None => api.fallback(|| async {
            Problem::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint")
        }),
    }
}

/// Runs until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    if config.port == 0 {
        return Err(ServiceError::InvalidPort);
    }
    if let Some(dir) = &config.static_dir {
        if !dir.is_dir() {
            return Err(ServiceError::MissingStaticDir(dir.clone()));
        }
    }
    let store = Store::open(&config.store_root)?;
    // Fail at startup rather than on the first request.
    store.list_catalogs()?;
    let app = router(AppState::new(store), config.static_dir.clone());

    let addr = config.addr();
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind { addr, source })?;
    tracing::info!(%addr, store = %config.store_root.display(), "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServiceError::Serve)
}
