//! Revision scoring responses in the ORES v3 shape:
//! `{"<wiki>": {"scores": {"<revid>": {"<model>": {"score": {"probability": {...}}}}}}}`.

use std::collections::BTreeMap;

use serde_json::Value;

use super::client::Client;
use super::transport::Request;

/// Quality classes from lowest to highest; index is the numeric value.
pub const QUALITY_CLASSES: [&str; 6] = ["Stub", "Start", "C", "B", "GA", "FA"];

pub const QUALITY_MODEL: &str = "articlequality";
pub const DAMAGING_MODEL: &str = "damaging";

#[derive(Debug, Clone, PartialEq)]
pub struct QualityScore {
    pub revision_id: u64,
    pub class_probabilities: [f64; 6],
    /// Expected class index, in `[0, 5]`.
    pub scalar: f64,
}

impl QualityScore {
    /// Renormalizes non-negative class weights.
    pub fn from_probabilities(revision_id: u64, probs: [f64; 6]) -> Option<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return None;
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let class_probabilities = probs.map(|p| p / total);
        let scalar = class_probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum::<f64>()
            .clamp(0.0, 5.0);
        Some(QualityScore {
            revision_id,
            class_probabilities,
            scalar,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DamagingScore {
    pub revision_id: u64,
    pub probability: f64,
    pub damaging: bool,
}

/// `probability >= threshold`.
pub fn damaging_flag(probability: f64, threshold: f64) -> bool {
    probability >= threshold
}

#[derive(Debug, Clone)]
pub struct ScoringEndpoint {
    /// e.g. `https://ores.wikimedia.org/v3/scores/enwiki/`
    pub url: String,
}

impl Default for ScoringEndpoint {
    fn default() -> Self {
        ScoringEndpoint {
            url: "https://ores.wikimedia.org/v3/scores/enwiki/".into(),
        }
    }
}

pub fn cache_key(model: &str, revision_id: u64) -> String {
    format!("{model}:{revision_id}")
}

fn request(endpoint: &ScoringEndpoint, model: &str, revision_id: u64) -> Request {
    Request {
        key: cache_key(model, revision_id),
        url: endpoint.url.clone(),
        query: vec![
            ("models".into(), model.into()),
            ("revids".into(), revision_id.to_string()),
        ],
    }
}

fn probability_object<'a>(body: &'a Value, model: &str, revision_id: u64) -> Result<&'a serde_json::Map<String, Value>, String> {
    let wiki = body
        .as_object()
        .and_then(|o| o.values().find(|v| v.get("scores").is_some()))
        .ok_or("no scores object")?;
    let model_node = wiki["scores"]
        .get(revision_id.to_string())
        .and_then(|r| r.get(model))
        .ok_or_else(|| format!("no {model} score for revision {revision_id}"))?;
    if let Some(err) = model_node.get("error") {
        return Err(format!("service error: {err}"));
    }
    model_node
        .get("score")
        .and_then(|s| s.get("probability"))
        .and_then(Value::as_object)
        .ok_or_else(|| "missing probability".to_string())
}

pub fn parse_quality(body: &str, revision_id: u64) -> Result<QualityScore, String> {
    let value: Value = serde_json::from_str(body).map_err(|e| e.to_string())?;
    let probs = probability_object(&value, QUALITY_MODEL, revision_id)?;
    let mut out = [0.0; 6];
    for (i, class) in QUALITY_CLASSES.iter().enumerate() {
        out[i] = probs
            .get(*class)
            .and_then(Value::as_f64)
            .ok_or_else(|| format!("missing class {class}"))?;
    }
    QualityScore::from_probabilities(revision_id, out).ok_or_else(|| "invalid probabilities".into())
}

pub fn parse_damaging(body: &str, revision_id: u64, threshold: f64) -> Result<DamagingScore, String> {
    let value: Value = serde_json::from_str(body).map_err(|e| e.to_string())?;
    let probs = probability_object(&value, DAMAGING_MODEL, revision_id)?;
    let p = probs
        .get("true")
        .and_then(Value::as_f64)
        .filter(|p| (0.0..=1.0).contains(p))
        .ok_or("missing or invalid `true` probability")?;
    Ok(DamagingScore {
        revision_id,
        probability: p,
        damaging: damaging_flag(p, threshold),
    })
}

/// Scores plus the ids that could not be scored.
pub struct Scored<T> {
    pub scores: BTreeMap<u64, T>,
    pub unavailable: Vec<u64>,
}

fn score<T>(
    ids: &[u64],
    client: &Client,
    endpoint: &ScoringEndpoint,
    model: &str,
    parse: impl Fn(&str, u64) -> Result<T, String>,
) -> Scored<T> {
    let mut unique = ids.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let requests: Vec<Request> = unique.iter().map(|&id| request(endpoint, model, id)).collect();
    let bodies = client.fetch_all(&requests);
    let mut scores = BTreeMap::new();
    let mut unavailable = Vec::new();
    for id in unique {
        match bodies.get(&cache_key(model, id)).and_then(Option::as_deref) {
            Some(body) => match parse(body, id) {
                Ok(s) => {
                    scores.insert(id, s);
                }
                Err(e) => {
                    log::warn!("{model} response for revision {id} malformed: {e}");
                    unavailable.push(id);
                }
            },
            None => unavailable.push(id),
        }
    }
    Scored { scores, unavailable }
}

pub fn score_quality(ids: &[u64], client: &Client, endpoint: &ScoringEndpoint) -> Scored<QualityScore> {
    score(ids, client, endpoint, QUALITY_MODEL, parse_quality)
}

pub fn score_damaging(ids: &[u64], client: &Client, endpoint: &ScoringEndpoint, threshold: f64) -> Scored<DamagingScore> {
    score(ids, client, endpoint, DAMAGING_MODEL, |b, id| parse_damaging(b, id, threshold))
}

/// Builds a response body in the service shape. Used to write fixtures.
pub fn quality_response(revision_id: u64, probs: [f64; 6]) -> String {
    let probability: serde_json::Map<String, Value> = QUALITY_CLASSES
        .iter()
        .zip(probs)
        .map(|(c, p)| (c.to_string(), Value::from(p)))
        .collect();
    let best = probs
        .iter()
        .enumerate()
        .fold(0, |b, (i, p)| if *p > probs[b] { i } else { b });
    serde_json::json!({"enwiki": {"scores": {revision_id.to_string(): {QUALITY_MODEL: {"score": {
        "prediction": QUALITY_CLASSES[best], "probability": probability}}}}}})
    .to_string()
}

pub fn damaging_response(revision_id: u64, p_true: f64) -> String {
    serde_json::json!({"enwiki": {"scores": {revision_id.to_string(): {DAMAGING_MODEL: {"score": {
        "prediction": p_true >= 0.5, "probability": {"false": 1.0 - p_true, "true": p_true}}}}}}})
    .to_string()
}
