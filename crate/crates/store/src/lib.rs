//! A privacy-aware app store service.
//!
//! [`Store`] holds an append-only registry of validated policies, the app
//! catalog, preference profiles and the per-profile alert feed, persisted
//! under one data directory. [`http::router`] exposes it over HTTP, and
//! [`conformance`] replays recorded request/response exchanges against it.

pub mod config;
pub mod conformance;
pub mod error;
pub mod http;
pub mod persist;
pub mod search;
pub mod store;

pub use config::{Boosts, ServiceConfig};
pub use error::StoreError;
pub use search::{SearchFilters, SearchQuery, SearchResult};
pub use store::{AlertPage, AppBadge, Exposure, PutOutcome, Store, StoredVersion};
