use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde_json::Value;

use super::client::Client;
use super::transport::Request;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContributorProfile {
    pub name: String,
    pub has_user_page: bool,
    pub gender_specified: bool,
    pub gender_value: Option<Gender>,
    pub emailable: bool,
    pub ever_edited_taboo: bool,
    /// When the account attributes were observed.
    pub snapshot: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UserAttributes {
    pub gender: Option<Gender>,
    pub emailable: bool,
}

#[derive(Debug, Clone)]
pub struct ApiEndpoint {
    /// e.g. `https://en.wikipedia.org/w/api.php`
    pub url: String,
}

impl Default for ApiEndpoint {
    fn default() -> Self {
        ApiEndpoint {
            url: "https://en.wikipedia.org/w/api.php".into(),
        }
    }
}

pub fn cache_key(name: &str) -> String {
    format!("user:{name}")
}

fn request(endpoint: &ApiEndpoint, name: &str) -> Request {
    Request {
        key: cache_key(name),
        url: endpoint.url.clone(),
        query: vec![
            ("action".into(), "query".into()),
            ("format".into(), "json".into()),
            ("formatversion".into(), "2".into()),
            ("list".into(), "users".into()),
            ("usprop".into(), "gender|emailable".into()),
            ("ususers".into(), name.into()),
        ],
    }
}

/// `Ok(None)` when the account is missing or hidden.
pub fn parse_user(body: &str, name: &str) -> Result<Option<UserAttributes>, String> {
    let value: Value = serde_json::from_str(body).map_err(|e| e.to_string())?;
    let users = value
        .pointer("/query/users")
        .and_then(Value::as_array)
        .ok_or("no query.users array")?;
    let user = users
        .iter()
        .find(|u| u.get("name").and_then(Value::as_str) == Some(name))
        .ok_or_else(|| format!("no entry for {name}"))?;
    if user.get("missing").is_some() || user.get("invalid").is_some() || user.get("hidden").is_some() {
        return Ok(None);
    }
    let gender = match user.get("gender").and_then(Value::as_str) {
        Some("female") => Some(Gender::Female),
        Some("male") => Some(Gender::Male),
        _ => None,
    };
    // formatversion=2 sends a boolean; the legacy format sends "" when true
    let emailable = match user.get("emailable") {
        Some(Value::Bool(b)) => *b,
        Some(_) => true,
        None => false,
    };
    Ok(Some(UserAttributes { gender, emailable }))
}

/// An account had a user page if the page existed at or before any of the
/// account's contributions, i.e. no later than the last one.
pub fn user_page_flags(
    user_page_created: &HashMap<String, DateTime<Utc>>,
    contributions: &HashMap<String, Vec<DateTime<Utc>>>,
) -> HashMap<String, bool> {
    contributions
        .iter()
        .map(|(name, times)| {
            let flag = match (user_page_created.get(name), times.iter().max()) {
                (Some(created), Some(last)) => created <= last,
                _ => false,
            };
            (name.clone(), flag)
        })
        .collect()
}

/// Profiles for account holders, sorted by name. Accounts the service
/// reports as missing, or whose response is unusable, get all-false
/// attributes; they are listed in the second return value.
pub fn fetch_user_attributes(
    names: &[String],
    client: &Client,
    endpoint: &ApiEndpoint,
    user_pages: &HashMap<String, bool>,
    taboo_editors: &HashSet<String>,
    snapshot: DateTime<Utc>,
) -> (Vec<ContributorProfile>, Vec<String>) {
    let unique: BTreeSet<&String> = names.iter().collect();
    let requests: Vec<Request> = unique.iter().map(|n| request(endpoint, n)).collect();
    let bodies: BTreeMap<String, Option<String>> = client.fetch_all(&requests);
    let mut profiles = Vec::with_capacity(unique.len());
    let mut flagged = Vec::new();
    for name in unique {
        let attrs = match bodies.get(&cache_key(name)).and_then(Option::as_deref) {
            Some(body) => match parse_user(body, name) {
                Ok(Some(a)) => Some(a),
                Ok(None) => {
                    log::debug!("account {name} is missing or hidden");
                    None
                }
                Err(e) => {
                    log::debug!("user response for {name} malformed: {e}");
                    None
                }
            },
            None => None,
        };
        if attrs.is_none() {
            flagged.push(name.clone());
        }
        let attrs = attrs.unwrap_or_default();
        profiles.push(ContributorProfile {
            name: name.clone(),
            has_user_page: user_pages.get(name).copied().unwrap_or(false),
            gender_specified: attrs.gender.is_some(),
            gender_value: attrs.gender,
            emailable: attrs.emailable,
            ever_edited_taboo: taboo_editors.contains(name),
            snapshot,
        });
    }
    (profiles, flagged)
}

/// Builds a response body in the service shape. Used to write fixtures.
pub fn user_response(name: &str, attrs: Option<UserAttributes>) -> String {
    let user = match attrs {
        None => serde_json::json!({"name": name, "missing": true}),
        Some(a) => serde_json::json!({
            "userid": 1,
            "name": name,
            "gender": a.gender.map(Gender::as_str).unwrap_or("unknown"),
            "emailable": a.emailable,
        }),
    };
    serde_json::json!({"batchcomplete": true, "query": {"users": [user]}}).to_string()
}
