use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};

use super::RevisionRecord;
use crate::matcher::Sample;
use crate::month::YearMonth;

/// Per-article values joined in from outside the revision history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArticleEnrichment {
    pub mean_quality: Option<f64>,
    pub mean_view_rank: Option<f64>,
    pub protected_proportion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArticleMetrics {
    pub page_id: u64,
    pub sample: Sample,
    pub n_contributions: u64,
    pub n_reverted: u64,
    pub n_damaging: u64,
    pub revert_rate: f64,
    /// Revisions without a damaging score count as not damaging.
    pub damaging_rate: f64,
    pub mean_quality: Option<f64>,
    pub mean_view_rank: Option<f64>,
    pub protected_proportion: f64,
    /// Mean `editor_nth_edit` over revisions with a known contributor.
    pub mean_editor_experience: Option<f64>,
    pub share_no_account: f64,
}

/// One record per article with at least one revision, sorted by page id.
/// Articles without revisions are reported in the second return value.
pub fn aggregate_article_metrics(
    articles: &[(u64, Sample)],
    revisions: &BTreeMap<u64, Vec<RevisionRecord>>,
    enrichments: &HashMap<u64, ArticleEnrichment>,
) -> (Vec<ArticleMetrics>, Vec<String>) {
    let mut sorted = articles.to_vec();
    sorted.sort();
    sorted.dedup_by_key(|(id, _)| *id);

    let mut out = Vec::with_capacity(sorted.len());
    let mut excluded = Vec::new();
    for (page_id, sample) in sorted {
        let revs = revisions.get(&page_id).map(Vec::as_slice).unwrap_or(&[]);
        if revs.is_empty() {
            excluded.push(format!("page {page_id}: no human revisions"));
            continue;
        }
        let n = revs.len() as u64;
        let n_reverted = revs.iter().filter(|r| r.is_reverted).count() as u64;
        let n_damaging = revs.iter().filter(|r| r.is_damaging == Some(true)).count() as u64;
        let no_account = revs.iter().filter(|r| !r.contributor.has_account()).count() as u64;
        let experience: Vec<u64> = revs.iter().filter_map(|r| r.editor_nth_edit).collect();
        let mean_editor_experience = (!experience.is_empty())
            .then(|| experience.iter().map(|&e| e as f64).sum::<f64>() / experience.len() as f64);
        let enrichment = enrichments.get(&page_id).cloned().unwrap_or_default();
        out.push(ArticleMetrics {
            page_id,
            sample,
            n_contributions: n,
            n_reverted,
            n_damaging,
            revert_rate: n_reverted as f64 / n as f64,
            damaging_rate: n_damaging as f64 / n as f64,
            mean_quality: enrichment.mean_quality,
            mean_view_rank: enrichment.mean_view_rank,
            protected_proportion: enrichment.protected_proportion.clamp(0.0, 1.0),
            mean_editor_experience,
            share_no_account: no_account as f64 / n as f64,
        });
    }
    (out, excluded)
}

/// The revision current at the end of each month, from the month of the first
/// revision through the month containing `horizon`. Revisions after the
/// horizon are ignored. `revisions` must be ordered.
pub fn month_end_revisions(revisions: &[RevisionRecord], horizon: DateTime<Utc>) -> Vec<(YearMonth, u64)> {
    let Some(first) = revisions.first() else {
        return Vec::new();
    };
    if first.timestamp > horizon {
        return Vec::new();
    }
    let last_month = YearMonth::of(&horizon);
    let mut month = YearMonth::of(&first.timestamp);
    let mut out = Vec::new();
    let mut idx = 0;
    let mut current = None;
    loop {
        let end = month.next().start().min(horizon + chrono::Duration::nanoseconds(1));
        while idx < revisions.len() && revisions[idx].timestamp < end {
            current = Some(revisions[idx].revision_id);
            idx += 1;
        }
        if let Some(id) = current {
            out.push((month, id));
        }
        if month == last_month {
            break;
        }
        month = month.next();
    }
    out
}

/// Quality of each article-month, taken from the month-end revision. Months
/// whose revision has no score are skipped.
pub fn monthly_quality_series(
    revisions: &[RevisionRecord],
    quality: &HashMap<u64, f64>,
    horizon: DateTime<Utc>,
) -> Vec<(YearMonth, f64)> {
    month_end_revisions(revisions, horizon)
        .into_iter()
        .filter_map(|(m, id)| quality.get(&id).map(|&q| (m, q)))
        .collect()
}
