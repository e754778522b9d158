//! Local HTTP session API for interactive post hoc selection.
//!
//! A session fixes one e-collection at creation. Membership queries, loss
//! switches, level changes (for α-independent collections) and binding
//! selections all run against it, and every step is appended to a
//! hash-chained audit log that can be replayed from disk.

pub mod api;
pub mod error;
pub mod session;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;

pub use api::{router, AppState};
pub use error::{ApiError, ErrorCode};
pub use session::{CreateSession, Session};
pub use store::Store;

/// Default bind address: loopback only.
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

/// Serves the API until the process is stopped.
pub async fn serve(addr: SocketAddr, dir: Option<PathBuf>, engine: eclosure_core::Engine) -> std::io::Result<()> {
    let store = match dir {
        Some(d) => Store::at(d)?,
        None => Store::in_memory(),
    };
    let app = router(AppState::new(store, engine));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app).await
}
