use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::cache::ResponseCache;
use super::transport::{Request, Transport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Live,
    /// Answer from the cache only.
    #[default]
    Fixture,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(Mode::Live),
            "fixture" => Ok(Mode::Fixture),
            other => Err(Error::Argument(format!("unknown mode `{other}` (expected live or fixture)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Live => "live",
            Mode::Fixture => "fixture",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClientOptions {
    pub parallelism: usize,
    /// Minimum spacing between requests across all workers.
    pub min_interval: Duration,
    pub retries: usize,
    pub backoff: Duration,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            parallelism: 4,
            min_interval: Duration::from_millis(100),
            retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

/// Cache-backed request runner shared by the scoring and metadata clients.
pub struct Client {
    mode: Mode,
    cache: Mutex<ResponseCache>,
    transport: Box<dyn Transport>,
    options: ClientOptions,
    next_slot: Mutex<Instant>,
}

impl Client {
    pub fn new(mode: Mode, cache: ResponseCache, transport: Box<dyn Transport>, options: ClientOptions) -> Self {
        Client {
            mode,
            cache: Mutex::new(cache),
            transport,
            options,
            next_slot: Mutex::new(Instant::now()),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Response bodies by request key; `None` marks an unavailable response.
    ///
    /// Cached responses are returned without contacting the transport. In
    /// fixture mode a cache miss is unavailable. In live mode a miss is
    /// fetched with retries and stored.
    pub fn fetch_all(&self, requests: &[Request]) -> BTreeMap<String, Option<String>> {
        let mut out = BTreeMap::new();
        let mut missing = Vec::new();
        {
            let cache = self.cache.lock().expect("cache lock");
            for r in requests {
                match cache.get(&r.key) {
                    Some(body) => {
                        out.insert(r.key.clone(), Some(body.to_string()));
                    }
                    None => missing.push(r.clone()),
                }
            }
        }
        missing.sort_by(|a, b| a.key.cmp(&b.key));
        missing.dedup_by(|a, b| a.key == b.key);
        if missing.is_empty() {
            return out;
        }
        if self.mode == Mode::Fixture {
            for r in missing {
                log::debug!("fixture cache has no entry for {}", r.key);
                out.insert(r.key, None);
            }
            return out;
        }

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.options.parallelism.max(1))
            .build()
            .expect("thread pool");
        let fetched: Vec<(String, Option<String>)> = pool.install(|| {
            missing
                .par_iter()
                .map(|r| (r.key.clone(), self.fetch_with_retry(r)))
                .collect()
        });
        let mut cache = self.cache.lock().expect("cache lock");
        for (key, body) in fetched {
            if let Some(b) = &body {
                cache.insert(key.clone(), b.clone());
            }
            out.insert(key, body);
        }
        out
    }

    fn wait_turn(&self) {
        let wait = {
            let mut slot = self.next_slot.lock().expect("rate lock");
            let now = Instant::now();
            let start = (*slot).max(now);
            *slot = start + self.options.min_interval;
            start - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }

    fn fetch_with_retry(&self, request: &Request) -> Option<String> {
        let attempts = self.options.retries.max(1);
        for attempt in 0..attempts {
            self.wait_turn();
            match self.transport.get(request) {
                Ok(body) => return Some(body),
                Err(e) => {
                    log::warn!("attempt {} for {} failed: {e}", attempt + 1, request.key);
                    if attempt + 1 < attempts {
                        std::thread::sleep(self.options.backoff * 2u32.pow(attempt as u32));
                    }
                }
            }
        }
        log::warn!("{} unavailable after {attempts} attempts", request.key);
        None
    }

    /// Persists new live responses.
    pub fn save_cache(&self) -> Result<()> {
        self.cache.lock().expect("cache lock").save()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enrichment::transport::FailingTransport;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn req(key: &str) -> Request {
        Request {
            key: key.into(),
            url: "http://invalid".into(),
            query: vec![],
        }
    }

    #[test]
    fn fixture_mode_never_contacts_transport() {
        let transport = Arc::new(FailingTransport::default());
        let mut cache = ResponseCache::in_memory();
        cache.insert("a".into(), "A".into());
        let client = Client::new(Mode::Fixture, cache, Box::new(transport.clone()), ClientOptions::default());
        let got = client.fetch_all(&[req("a"), req("b")]);
        assert_eq!(got["a"].as_deref(), Some("A"));
        assert_eq!(got["b"], None);
        assert_eq!(transport.contacts(), 0);
    }

    struct Flaky {
        calls: AtomicUsize,
    }

    impl Transport for Flaky {
        fn get(&self, r: &Request) -> Result<String> {
            if self.calls.fetch_add(1, Ordering::SeqCst) == 0 {
                Err(Error::Transport("first call fails".into()))
            } else {
                Ok(format!("body-{}", r.key))
            }
        }
    }

    #[test]
    fn live_mode_retries_and_caches() {
        let options = ClientOptions {
            parallelism: 1,
            min_interval: Duration::ZERO,
            retries: 3,
            backoff: Duration::ZERO,
        };
        let client = Client::new(
            Mode::Live,
            ResponseCache::in_memory(),
            Box::new(Flaky { calls: AtomicUsize::new(0) }),
            options,
        );
        let got = client.fetch_all(&[req("x")]);
        assert_eq!(got["x"].as_deref(), Some("body-x"));
        assert_eq!(client.cache_len(), 1);
    }

    #[test]
    fn live_mode_gives_up() {
        let options = ClientOptions {
            parallelism: 2,
            min_interval: Duration::ZERO,
            retries: 2,
            backoff: Duration::ZERO,
        };
        let transport = Arc::new(FailingTransport::default());
        let client = Client::new(Mode::Live, ResponseCache::in_memory(), Box::new(transport.clone()), options);
        assert_eq!(client.fetch_all(&[req("x")])["x"], None);
        assert_eq!(transport.contacts(), 2);
    }
}
