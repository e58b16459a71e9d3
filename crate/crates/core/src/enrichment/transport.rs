use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use crate::{Error, Result};

/// One HTTP GET. `key` identifies the response in the cache and is
/// independent of the URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub key: String,
    pub url: String,
    pub query: Vec<(String, String)>,
}

pub trait Transport: Send + Sync {
    fn get(&self, request: &Request) -> Result<String>;
}

/// Blocking HTTPS transport.
pub struct HttpTransport {
    agent: ureq::Agent,
    user_agent: String,
}

impl HttpTransport {
    pub fn new(user_agent: impl Into<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build();
        HttpTransport {
            agent: config.into(),
            user_agent: user_agent.into(),
        }
    }
}

impl Transport for HttpTransport {
    fn get(&self, request: &Request) -> Result<String> {
        let mut req = self
            .agent
            .get(&request.url)
            .header("User-Agent", &self.user_agent);
        for (k, v) in &request.query {
            req = req.query(k, v);
        }
        let mut response = req
            .call()
            .map_err(|e| Error::Transport(format!("{}: {e}", request.key)))?;
        response
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Transport(format!("{}: {e}", request.key)))
    }
}

/// Transport that refuses every request and counts attempts. Used to prove
/// that fixture mode never reaches the network.
#[derive(Debug, Default)]
pub struct FailingTransport {
    contacts: AtomicUsize,
}

impl FailingTransport {
    pub fn contacts(&self) -> usize {
        self.contacts.load(Ordering::SeqCst)
    }
}

impl Transport for FailingTransport {
    fn get(&self, request: &Request) -> Result<String> {
        self.contacts.fetch_add(1, Ordering::SeqCst);
        Err(Error::Transport(format!("network contact attempted for {}", request.key)))
    }
}

impl<T: Transport + ?Sized> Transport for std::sync::Arc<T> {
    fn get(&self, request: &Request) -> Result<String> {
        (**self).get(request)
    }
}
