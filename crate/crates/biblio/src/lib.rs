//! Client for E-utilities style bibliographic search services: paged
//! search-then-fetch per author query, a shared sliding-window rate limit,
//! and retries with exponential backoff.

pub mod clock;
pub mod error;
pub mod eutils;
pub mod http;
pub mod rate;

pub use clock::{Clock, MockClock, SystemClock};
pub use error::{BiblioError, Result};
pub use eutils::{parse_articles, parse_search, ClientConfig, EutilsClient, SearchPage, API_KEY_ENV, DEFAULT_BASE_URL};
pub use http::{HttpGet, HttpResponse, UreqHttp};
pub use rate::RateLimiter;
