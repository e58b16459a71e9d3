use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::matcher::title_key;
use crate::month::YearMonth;
use crate::stats::average_ranks;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonthlyViews {
    pub page_id: u64,
    pub month: YearMonth,
    pub views: u64,
}

/// Reads `page<TAB>YYYY-MM<TAB>views` lines. `page` is looked up as a title
/// first and otherwise read as a page id. Rows for pages outside `titles`
/// are skipped; a header line is tolerated. Duplicate `(page, month)` rows
/// are summed.
pub fn read_pageviews(path: &Path, titles: &HashMap<String, u64>) -> Result<Vec<MonthlyViews>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let known: std::collections::HashSet<u64> = titles.values().copied().collect();
    let mut totals: BTreeMap<(u64, YearMonth), u64> = BTreeMap::new();
    let mut skipped = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ctx = || format!("{}:{}", path.display(), i + 1);
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(ctx(), format!("expected 3 fields, found {}", fields.len())));
        }
        let Ok(views) = fields[2].trim().parse::<u64>() else {
            if i == 0 {
                continue;
            }
            return Err(Error::parse(ctx(), format!("bad view count `{}`", fields[2])));
        };
        let month = YearMonth::parse(fields[1]).map_err(|_| Error::parse(ctx(), "bad month"))?;
        let page = fields[0].trim();
        let id = titles
            .get(&title_key(page))
            .copied()
            .or_else(|| page.parse::<u64>().ok().filter(|id| known.contains(id)));
        match id {
            Some(id) => *totals.entry((id, month)).or_insert(0) += views,
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::info!("{}: skipped {skipped} rows for pages outside the samples", path.display());
    }
    Ok(totals
        .into_iter()
        .map(|((page_id, month), views)| MonthlyViews { page_id, month, views })
        .collect())
}

/// Ranks pages within each month by views (most viewed = 1, ties averaged)
/// and averages each page's ranks over the months it appears in.
///
/// Pages in `articles` without any view record are returned in the second
/// value.
pub fn rank_views(records: &[MonthlyViews], articles: &[u64]) -> (BTreeMap<u64, f64>, Vec<u64>) {
    let wanted: std::collections::HashSet<u64> = articles.iter().copied().collect();
    let mut by_month: BTreeMap<YearMonth, BTreeMap<u64, u64>> = BTreeMap::new();
    for r in records.iter().filter(|r| wanted.contains(&r.page_id)) {
        *by_month.entry(r.month).or_default().entry(r.page_id).or_insert(0) += r.views;
    }
    let mut sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for pages in by_month.values() {
        let ids: Vec<u64> = pages.keys().copied().collect();
        let negated: Vec<f64> = pages.values().map(|&v| -(v as f64)).collect();
        for (id, rank) in ids.into_iter().zip(average_ranks(&negated)) {
            let e = sums.entry(id).or_insert((0.0, 0));
            e.0 += rank;
            e.1 += 1;
        }
    }
    let means: BTreeMap<u64, f64> = sums.into_iter().map(|(id, (s, n))| (id, s / n as f64)).collect();
    let mut missing: Vec<u64> = wanted.into_iter().filter(|id| !means.contains_key(id)).collect();
    missing.sort_unstable();
    for id in &missing {
        log::warn!("page {id} has no pageview records; excluded from view ranks");
    }
    (means, missing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(page_id: u64, month: &str, views: u64) -> MonthlyViews {
        MonthlyViews {
            page_id,
            month: YearMonth::parse(month).unwrap(),
            views,
        }
    }

    #[test]
    fn single_article() {
        let (ranks, missing) = rank_views(&[mv(1, "2020-01", 7)], &[1]);
        assert_eq!(ranks[&1], 1.0);
        assert!(missing.is_empty());
    }

    #[test]
    fn two_articles_two_months() {
        let recs = [mv(1, "2020-01", 10), mv(2, "2020-01", 5), mv(1, "2020-02", 1), mv(2, "2020-02", 2)];
        let (ranks, _) = rank_views(&recs, &[1, 2]);
        assert_eq!(ranks[&1], 1.5);
        assert_eq!(ranks[&2], 1.5);
    }

    #[test]
    fn permutation_invariant_and_reports_missing() {
        let recs = vec![mv(1, "2020-01", 3), mv(2, "2020-01", 3), mv(3, "2020-01", 9), mv(1, "2020-02", 4)];
        let mut rev = recs.clone();
        rev.reverse();
        let (a, missing) = rank_views(&recs, &[1, 2, 3, 4]);
        let (b, _) = rank_views(&rev, &[4, 3, 2, 1]);
        assert_eq!(a, b);
        assert_eq!(a[&1], (2.5 + 1.0) / 2.0);
        assert_eq!(missing, [4]);
    }

    #[test]
    fn reads_titles_and_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("views.tsv");
        std::fs::write(&path, "page\tmonth\tviews\nHell\t2020-01\t5\n2\t2020-01\t3\nHell\t2020-01\t1\nOther\t2020-01\t9\n").unwrap();
        let titles: HashMap<String, u64> = [("Hell".to_string(), 1), ("Penis".to_string(), 2)].into();
        let recs = read_pageviews(&path, &titles).unwrap();
        assert_eq!(recs, [mv(1, "2020-01", 6), mv(2, "2020-01", 3)]);
    }
}
