//! HTTP session service: session lifecycle, turn exchange with streaming,
//! feedback retrieval, persistence and provider clients.

pub mod api;
pub mod config;
pub mod provider;
pub mod record;
pub mod session;
pub mod store;

pub use api::{router, ErrorBody};
pub use config::{ProviderConfig, ServiceConfig};
pub use record::{SessionArchive, SessionRecord, SessionStatus};
pub use session::{CallPolicy, CreateSession, Engines, ServiceError, SessionService, TurnRequest, TurnResponse};
pub use store::{FileStore, MemoryStore, Store};
