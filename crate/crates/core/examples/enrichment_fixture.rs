//! Fixture-mode enrichment: every answer comes from the on-disk caches, and
//! any attempt to reach the network fails.

use std::path::Path;

use tabooscope::enrichment::{
    fetch_categories, open_client, rank_views, score_quality, ApiEndpoint, ClientOptions, Mode, MonthlyViews,
    ScoringEndpoint, DEFAULT_SCOPE,
};
use tabooscope::month::YearMonth;

fn main() -> tabooscope::Result<()> {
    let cache = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/cache");
    let quality = open_client(Mode::Fixture, &cache.join("quality.jsonl"), ClientOptions::default())?;
    let key = quality_key(&cache.join("quality.jsonl"));
    let scored = score_quality(&[key, 1], &quality, &ScoringEndpoint::default());
    for (id, q) in &scored.scores {
        println!("revision {id}: quality {:.3}", q.scalar);
    }
    println!("not cached: {:?}", scored.unavailable);

    let categories = open_client(Mode::Fixture, &cache.join("categories.jsonl"), ClientOptions::default())?;
    for rec in fetch_categories(&["Hell".into(), "Kettle".into()], &categories, &ApiEndpoint::default(), DEFAULT_SCOPE) {
        println!("{}: in scope {} {:?}", rec.title, rec.in_scope, rec.categories);
    }

    let m = |month| YearMonth::new(2012, month).unwrap();
    let views = [
        MonthlyViews { page_id: 1, month: m(1), views: 900 },
        MonthlyViews { page_id: 2, month: m(1), views: 300 },
        MonthlyViews { page_id: 3, month: m(1), views: 300 },
        MonthlyViews { page_id: 1, month: m(2), views: 100 },
        MonthlyViews { page_id: 2, month: m(2), views: 500 },
    ];
    let (ranks, missing) = rank_views(&views, &[1, 2, 3, 4]);
    println!("mean view ranks {ranks:?}, no data for {missing:?}");
    Ok(())
}

/// First revision id present in the quality cache.
fn quality_key(path: &Path) -> u64 {
    let text = std::fs::read_to_string(path).unwrap_or_default();
    text.lines()
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .filter_map(|v| v["key"].as_str()?.strip_prefix("articlequality:")?.parse().ok())
        .next()
        .unwrap_or(0)
}
