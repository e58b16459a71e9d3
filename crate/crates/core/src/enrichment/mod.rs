//! External scores and metadata behind a replayable response cache, plus
//! pageview ingestion and view ranks.
//!
//! Every client goes through [`Client`]: in [`Mode::Fixture`] responses come
//! only from the cache file; in [`Mode::Live`] misses are fetched over HTTP
//! and written back.

pub mod cache;
pub mod categories;
pub mod client;
pub mod ores;
pub mod transport;
pub mod users;
pub mod views;

pub use cache::ResponseCache;
pub use categories::{fetch_categories, CategoryRecord, DEFAULT_SCOPE};
pub use client::{Client, ClientOptions, Mode};
pub use ores::{score_damaging, score_quality, DamagingScore, QualityScore, ScoringEndpoint, QUALITY_CLASSES};
pub use transport::{FailingTransport, HttpTransport, Request, Transport};
pub use users::{fetch_user_attributes, user_page_flags, ApiEndpoint, ContributorProfile, Gender};
pub use views::{rank_views, read_pageviews, MonthlyViews};

use std::path::Path;
use std::time::Duration;

use crate::Result;

pub const USER_AGENT: &str = concat!("tabooscope/", env!("CARGO_PKG_VERSION"));

/// A client over the cache at `cache_path`. Live mode uses HTTPS; fixture
/// mode gets a transport that refuses every request.
pub fn open_client(mode: Mode, cache_path: &Path, options: ClientOptions) -> Result<Client> {
    let cache = ResponseCache::open(cache_path)?;
    let transport: Box<dyn Transport> = match mode {
        Mode::Live => Box::new(HttpTransport::new(USER_AGENT, Duration::from_secs(30))),
        Mode::Fixture => Box::new(FailingTransport::default()),
    };
    Ok(Client::new(mode, cache, transport, options))
}
