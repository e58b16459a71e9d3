use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use super::client::Client;
use super::transport::Request;
use super::users::ApiEndpoint;

pub const DEFAULT_SCOPE: &str = "Sexology and sexuality";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryRecord {
    pub title: String,
    /// Union of article and talk-page categories, without the `Category:` prefix.
    pub categories: BTreeSet<String>,
    pub in_scope: bool,
}

pub fn cache_key(title: &str) -> String {
    format!("categories:{title}")
}

pub fn talk_title(title: &str) -> String {
    format!("Talk:{title}")
}

fn request(endpoint: &ApiEndpoint, title: &str) -> Request {
    Request {
        key: cache_key(title),
        url: endpoint.url.clone(),
        query: vec![
            ("action".into(), "query".into()),
            ("format".into(), "json".into()),
            ("formatversion".into(), "2".into()),
            ("prop".into(), "categories".into()),
            ("cllimit".into(), "max".into()),
            ("titles".into(), title.into()),
        ],
    }
}

/// Category names from a `prop=categories` response, in either format version.
pub fn parse_categories(body: &str) -> Result<Vec<String>, String> {
    let value: Value = serde_json::from_str(body).map_err(|e| e.to_string())?;
    let pages = value.pointer("/query/pages").ok_or("no query.pages")?;
    let pages: Vec<&Value> = match pages {
        Value::Array(a) => a.iter().collect(),
        Value::Object(o) => o.values().collect(),
        _ => return Err("query.pages has unexpected type".into()),
    };
    let mut out = Vec::new();
    for page in pages {
        if let Some(cats) = page.get("categories").and_then(Value::as_array) {
            for c in cats {
                if let Some(t) = c.get("title").and_then(Value::as_str) {
                    out.push(t.strip_prefix("Category:").unwrap_or(t).to_string());
                }
            }
        }
    }
    Ok(out)
}

pub fn in_scope(categories: &BTreeSet<String>, marker: &str) -> bool {
    let marker = marker.to_lowercase();
    categories.iter().any(|c| c.to_lowercase().contains(&marker))
}

/// Categories of each article and its talk page. Unavailable responses
/// contribute nothing and are logged.
pub fn fetch_categories(
    titles: &[String],
    client: &Client,
    endpoint: &ApiEndpoint,
    scope_marker: &str,
) -> Vec<CategoryRecord> {
    let unique: BTreeSet<&String> = titles.iter().collect();
    let requests: Vec<Request> = unique
        .iter()
        .flat_map(|t| [request(endpoint, t), request(endpoint, &talk_title(t))])
        .collect();
    let bodies: BTreeMap<String, Option<String>> = client.fetch_all(&requests);
    unique
        .into_iter()
        .map(|title| {
            let mut categories = BTreeSet::new();
            for page in [title.clone(), talk_title(title)] {
                match bodies.get(&cache_key(&page)).and_then(Option::as_deref) {
                    Some(body) => match parse_categories(body) {
                        Ok(c) => categories.extend(c),
                        Err(e) => log::warn!("category response for {page} malformed: {e}"),
                    },
                    None => log::warn!("categories for {page} unavailable"),
                }
            }
            let in_scope = in_scope(&categories, scope_marker);
            CategoryRecord {
                title: title.clone(),
                categories,
                in_scope,
            }
        })
        .collect()
}

/// Builds a response body in the service shape. Used to write fixtures.
pub fn categories_response(title: &str, categories: &[&str]) -> String {
    let cats: Vec<Value> = categories
        .iter()
        .map(|c| serde_json::json!({"ns": 14, "title": format!("Category:{c}")}))
        .collect();
    let mut page = serde_json::json!({"pageid": 1, "ns": 0, "title": title});
    if !cats.is_empty() {
        page["categories"] = Value::Array(cats);
    }
    serde_json::json!({"batchcomplete": true, "query": {"pages": [page]}}).to_string()
}
