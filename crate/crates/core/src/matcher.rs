//! Title matching and sample construction.
//!
//! Titles are normalized exactly like definitions (lowercase alphabetic runs,
//! stop words removed). A page matches an n-gram when its whole normalized
//! title equals the n-gram's token sequence. Redirects are followed to their
//! target article; redirects to a section, cycles, long chains and dangling
//! targets are dropped. Disambiguation and list pages never enter a sample.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dictionary::{normalize_definition, StopwordConfig};
use crate::tsv::TsvWriter;
use crate::{Error, Result};

/// Maximum redirect hops followed before giving up.
pub const MAX_REDIRECT_DEPTH: usize = 5;

const DISAMBIGUATION_MARKER: &str = "disambiguation";

/// Page metadata as extracted from a dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub page_id: u64,
    pub title: String,
    /// Raw redirect target, possibly with a `#section` suffix.
    pub redirect_target: Option<String>,
    pub markers: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PageKind {
    Article,
    Redirect,
    Disambiguation,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sample {
    Taboo,
    Comparison,
}

impl Sample {
    pub fn as_str(self) -> &'static str {
        match self {
            Sample::Taboo => "taboo",
            Sample::Comparison => "comparison",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "taboo" => Some(Sample::Taboo),
            "comparison" => Some(Sample::Comparison),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedirectTarget {
    pub title: String,
    pub section: Option<String>,
}

impl RedirectTarget {
    pub fn parse(raw: &str) -> Self {
        match raw.split_once('#') {
            Some((title, section)) => RedirectTarget {
                title: title.trim().to_string(),
                section: Some(section.trim().to_string()),
            },
            None => RedirectTarget {
                title: raw.trim().to_string(),
                section: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRecord {
    pub page_id: u64,
    pub title: String,
    pub normalized_title: Vec<String>,
    pub kind: PageKind,
    pub redirect_target: Option<RedirectTarget>,
    pub sample: Option<Sample>,
}

impl ArticleRecord {
    pub fn from_page(page: &PageRecord, stopwords: &StopwordConfig) -> Self {
        let redirect_target = page.redirect_target.as_deref().map(RedirectTarget::parse);
        let kind = if redirect_target.is_some() {
            PageKind::Redirect
        } else if is_disambiguation(page) {
            PageKind::Disambiguation
        } else if is_list(&page.title) {
            PageKind::List
        } else {
            PageKind::Article
        };
        ArticleRecord {
            page_id: page.page_id,
            title: page.title.clone(),
            normalized_title: normalize_title(&page.title, stopwords),
            kind,
            redirect_target,
            sample: None,
        }
    }
}

fn is_disambiguation(page: &PageRecord) -> bool {
    page.markers
        .iter()
        .any(|m| m.eq_ignore_ascii_case(DISAMBIGUATION_MARKER))
        || page.title.trim_end().to_lowercase().ends_with("(disambiguation)")
}

fn is_list(title: &str) -> bool {
    title.starts_with("List of ") || title.starts_with("Lists of ")
}

pub fn normalize_title(title: &str, stopwords: &StopwordConfig) -> Vec<String> {
    normalize_definition(title, stopwords)
}

/// Keeps ordinary articles; drops disambiguation and list pages.
/// Redirects are not articles and are also rejected here.
pub fn filter_page(article: &ArticleRecord) -> bool {
    article.kind == PageKind::Article
}

/// Returns the n-gram a title matches exactly, if any.
pub fn title_match<'a>(article: &ArticleRecord, ngrams: &'a HashSet<String>) -> Option<&'a String> {
    if article.normalized_title.is_empty() {
        return None;
    }
    ngrams.get(&article.normalized_title.join(" "))
}

pub fn match_titles<'a>(
    articles: &'a [ArticleRecord],
    ngrams: &HashSet<String>,
) -> Vec<&'a ArticleRecord> {
    articles
        .iter()
        .filter(|a| title_match(a, ngrams).is_some())
        .collect()
}

/// Canonical lookup key for page titles: underscores as spaces, first letter
/// uppercased.
pub fn title_key(title: &str) -> String {
    let t = title.replace('_', " ");
    let t = t.trim();
    let mut chars = t.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropReason {
    SectionTarget(String),
    Cycle,
    ChainTooLong,
    MissingTarget(String),
    NotAnArticle(PageKind),
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DropReason::SectionTarget(t) => write!(f, "redirect to section `{t}`"),
            DropReason::Cycle => write!(f, "redirect cycle"),
            DropReason::ChainTooLong => write!(f, "redirect chain longer than {MAX_REDIRECT_DEPTH}"),
            DropReason::MissingTarget(t) => write!(f, "redirect target `{t}` not in corpus"),
            DropReason::NotAnArticle(k) => write!(f, "not an article ({k:?})"),
        }
    }
}

/// All pages indexed by title key.
pub struct RedirectMap<'a> {
    by_title: HashMap<String, &'a ArticleRecord>,
}

impl<'a> RedirectMap<'a> {
    pub fn new(articles: &'a [ArticleRecord]) -> Self {
        let mut by_title = HashMap::with_capacity(articles.len());
        for a in articles {
            by_title.entry(title_key(&a.title)).or_insert(a);
        }
        RedirectMap { by_title }
    }

    pub fn get(&self, title: &str) -> Option<&'a ArticleRecord> {
        self.by_title.get(&title_key(title)).copied()
    }
}

/// Follows redirects from `article` to the page that should enter a sample.
pub fn resolve_redirect<'a>(
    article: &'a ArticleRecord,
    redirects: &RedirectMap<'a>,
) -> std::result::Result<&'a ArticleRecord, DropReason> {
    let mut current = article;
    let mut visited = HashSet::new();
    visited.insert(current.page_id);
    let mut hops = 0;
    while let Some(target) = &current.redirect_target {
        if let Some(section) = &target.section {
            return Err(DropReason::SectionTarget(format!("{}#{}", target.title, section)));
        }
        if hops == MAX_REDIRECT_DEPTH {
            return Err(DropReason::ChainTooLong);
        }
        let next = redirects
            .get(&target.title)
            .ok_or_else(|| DropReason::MissingTarget(target.title.clone()))?;
        if !visited.insert(next.page_id) {
            return Err(DropReason::Cycle);
        }
        current = next;
        hops += 1;
    }
    Ok(current)
}

/// Uniform sample of `n` ids without replacement using ChaCha8 seeded with
/// `seed`. The population is sorted first and the result is returned sorted.
pub fn sample_comparison(population: &[u64], n: usize, seed: u64) -> Result<Vec<u64>> {
    if n > population.len() {
        return Err(Error::Argument(format!(
            "comparison size {n} exceeds population of {}",
            population.len()
        )));
    }
    let mut sorted = population.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if n > sorted.len() {
        return Err(Error::Argument(format!(
            "comparison size {n} exceeds population of {} distinct pages",
            sorted.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<u64> = index::sample(&mut rng, sorted.len(), n)
        .into_iter()
        .map(|i| sorted[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub page_id: u64,
    pub title: String,
    pub sample: Sample,
    /// The n-gram that matched.
    pub ngram: String,
    /// Title of the page whose title matched (differs from `title` when the
    /// match came through a redirect).
    pub matched_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedPage {
    pub page_id: u64,
    pub title: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct SampleManifest {
    pub entries: Vec<ManifestEntry>,
    pub dropped: Vec<DroppedPage>,
    pub population_size: usize,
    pub seed: u64,
}

impl SampleManifest {
    pub fn sample_of(&self, page_id: u64) -> Option<Sample> {
        self.entries.iter().find(|e| e.page_id == page_id).map(|e| e.sample)
    }

    pub fn ids(&self, sample: Sample) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|e| e.sample == sample)
            .map(|e| e.page_id)
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = TsvWriter::create(path, &["page_id", "title", "sample", "ngram", "matched_title"])?;
        for e in &self.entries {
            w.row(&[
                e.page_id.to_string(),
                e.title.clone(),
                e.sample.as_str().to_string(),
                e.ngram.clone(),
                e.matched_title.clone(),
            ])?;
        }
        w.finish()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (header, rows) = crate::tsv::read(path)?;
        let cols = crate::tsv::columns(
            &header,
            &["page_id", "title", "sample", "ngram", "matched_title"],
            path,
        )?;
        let mut entries = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let field = |c: usize| row.get(cols[c]).cloned().unwrap_or_default();
            let ctx = || format!("{}:{}", path.display(), i + 2);
            entries.push(ManifestEntry {
                page_id: field(0).parse().map_err(|_| Error::parse(ctx(), "bad page_id"))?,
                title: field(1),
                sample: Sample::parse(&field(2)).ok_or_else(|| Error::parse(ctx(), "bad sample"))?,
                ngram: field(3),
                matched_title: field(4),
            });
        }
        Ok(SampleManifest {
            entries,
            ..Default::default()
        })
    }

    pub fn write_dropped(&self, path: &Path) -> Result<()> {
        let mut w = TsvWriter::create(path, &["page_id", "title", "reason"])?;
        for d in &self.dropped {
            w.row(&[d.page_id.to_string(), d.title.clone(), d.reason.clone()])?;
        }
        w.finish()
    }
}

/// Builds the taboo sample and the comparison sample.
///
/// A page's title is matched against the lexicon first; failing that, against
/// the population of all definition n-grams. Matches are resolved through
/// redirects and must land on an ordinary article. Both samples go through
/// identical rules. The comparison population excludes taboo articles.
pub fn build_samples(
    pages: &[PageRecord],
    lexicon_ngrams: &HashSet<String>,
    population_ngrams: &HashSet<String>,
    comparison_size: usize,
    seed: u64,
    stopwords: &StopwordConfig,
) -> Result<SampleManifest> {
    let articles: Vec<ArticleRecord> = pages
        .iter()
        .map(|p| ArticleRecord::from_page(p, stopwords))
        .collect();
    let redirects = RedirectMap::new(&articles);

    // resolved target page_id -> (title, ngram, matched_title); first match in
    // page_id order wins so provenance is deterministic
    let mut taboo: BTreeMap<u64, ManifestEntry> = BTreeMap::new();
    let mut population: BTreeMap<u64, ManifestEntry> = BTreeMap::new();
    let mut dropped = Vec::new();

    let mut ordered: Vec<&ArticleRecord> = articles.iter().collect();
    ordered.sort_by_key(|a| a.page_id);
    for article in ordered {
        let (sample, ngram) = if let Some(g) = title_match(article, lexicon_ngrams) {
            (Sample::Taboo, g.clone())
        } else if let Some(g) = title_match(article, population_ngrams) {
            (Sample::Comparison, g.clone())
        } else {
            continue;
        };
        let target = match resolve_redirect(article, &redirects) {
            Ok(t) if filter_page(t) => t,
            Ok(t) => {
                dropped.push(DroppedPage {
                    page_id: article.page_id,
                    title: article.title.clone(),
                    reason: DropReason::NotAnArticle(t.kind).to_string(),
                });
                continue;
            }
            Err(reason) => {
                log::debug!("dropping `{}`: {reason}", article.title);
                dropped.push(DroppedPage {
                    page_id: article.page_id,
                    title: article.title.clone(),
                    reason: reason.to_string(),
                });
                continue;
            }
        };
        let entry = ManifestEntry {
            page_id: target.page_id,
            title: target.title.clone(),
            sample,
            ngram,
            matched_title: article.title.clone(),
        };
        let bucket = match sample {
            Sample::Taboo => &mut taboo,
            Sample::Comparison => &mut population,
        };
        bucket.entry(target.page_id).or_insert(entry);
    }

    for id in taboo.keys() {
        population.remove(id);
    }
    let population_ids: Vec<u64> = population.keys().copied().collect();
    let picked = sample_comparison(&population_ids, comparison_size, seed)?;

    let mut entries: Vec<ManifestEntry> = taboo.into_values().collect();
    entries.extend(picked.into_iter().map(|id| population[&id].clone()));
    Ok(SampleManifest {
        entries,
        dropped,
        population_size: population_ids.len(),
        seed,
    })
}

/// Reads a page table: `page_id<TAB>title<TAB>redirect_target<TAB>markers`
/// with comma-separated markers.
pub fn read_page_table(path: &Path) -> Result<Vec<PageRecord>> {
    let (header, rows) = crate::tsv::read(path)?;
    let cols = crate::tsv::columns(&header, &["page_id", "title", "redirect_target", "markers"], path)?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let field = |c: usize| row.get(cols[c]).map(String::as_str).unwrap_or("");
            Ok(PageRecord {
                page_id: field(0).parse().map_err(|_| {
                    Error::parse(format!("{}:{}", path.display(), i + 2), "bad page_id")
                })?,
                title: field(1).to_string(),
                redirect_target: Some(field(2).trim())
                    .filter(|t| !t.is_empty())
                    .map(str::to_string),
                markers: field(3)
                    .split(',')
                    .map(str::trim)
                    .filter(|m| !m.is_empty())
                    .map(str::to_string)
                    .collect(),
            })
        })
        .collect()
}

pub fn write_page_table(path: &Path, pages: &[PageRecord]) -> Result<()> {
    let mut w = TsvWriter::create(path, &["page_id", "title", "redirect_target", "markers"])?;
    for p in pages {
        let markers: Vec<&str> = p.markers.iter().map(String::as_str).collect();
        w.row(&[
            p.page_id.to_string(),
            p.title.clone(),
            p.redirect_target.clone().unwrap_or_default(),
            markers.join(","),
        ])?;
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stop() -> StopwordConfig {
        StopwordConfig::english()
    }

    fn page(id: u64, title: &str, redirect: Option<&str>) -> PageRecord {
        PageRecord {
            page_id: id,
            title: title.into(),
            redirect_target: redirect.map(String::from),
            markers: BTreeSet::new(),
        }
    }

    fn set(items: &[&str]) -> HashSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn title_normalization() {
        assert_eq!(normalize_title("Death", &stop()), ["death"]);
        assert_eq!(normalize_title("Hell to the no", &stop()), ["hell"]);
        assert_eq!(normalize_title("The Old Age", &stop()), ["old", "age"]);
    }

    #[test]
    fn empty_ngram_set_matches_nothing() {
        let articles = vec![ArticleRecord::from_page(&page(1, "Death", None), &stop())];
        assert!(match_titles(&articles, &HashSet::new()).is_empty());
    }

    #[test]
    fn planted_matches() {
        let titles = [
            "Death", "Old age", "Tree", "Old Age Pension", "River", "Hell", "Music", "Age old",
            "Red tree", "Song",
        ];
        let articles: Vec<_> = titles
            .iter()
            .enumerate()
            .map(|(i, t)| ArticleRecord::from_page(&page(i as u64, t, None), &stop()))
            .collect();
        let lex = set(&["death", "old age", "hell", "pension"]);
        let matched: Vec<_> = match_titles(&articles, &lex).iter().map(|a| a.title.as_str()).collect();
        assert_eq!(matched, ["Death", "Old age", "Hell"]);
    }

    #[test]
    fn matching_ignores_case_and_punctuation() {
        let a = ArticleRecord::from_page(&page(1, "HELL!", None), &stop());
        assert!(title_match(&a, &set(&["hell"])).is_some());
    }

    #[test]
    fn redirect_lands_on_target() {
        let pages = [
            page(1, "Being Bobby Brown", None),
            page(2, "Hell to the no", Some("Being Bobby Brown")),
        ];
        let articles: Vec<_> = pages.iter().map(|p| ArticleRecord::from_page(p, &stop())).collect();
        let map = RedirectMap::new(&articles);
        assert_eq!(resolve_redirect(&articles[0], &map).unwrap().page_id, 1);
        assert_eq!(resolve_redirect(&articles[1], &map).unwrap().title, "Being Bobby Brown");
    }

    #[test]
    fn redirect_drop_cases() {
        let pages = vec![
            page(1, "Page", None),
            page(2, "To section", Some("Page#Section")),
            page(3, "Loop a", Some("Loop b")),
            page(4, "Loop b", Some("Loop a")),
            page(5, "Dangling", Some("Nowhere")),
            page(10, "C0", Some("C1")),
            page(11, "C1", Some("C2")),
            page(12, "C2", Some("C3")),
            page(13, "C3", Some("C4")),
            page(14, "C4", Some("C5")),
            page(15, "C5", Some("C6")),
            page(16, "C6", None),
            page(20, "D0", Some("C2")),
        ];
        let articles: Vec<_> = pages.iter().map(|p| ArticleRecord::from_page(p, &stop())).collect();
        let map = RedirectMap::new(&articles);
        let r = |i: usize| resolve_redirect(&articles[i], &map);
        assert!(matches!(r(1), Err(DropReason::SectionTarget(_))));
        assert_eq!(r(2), Err(DropReason::Cycle));
        assert!(matches!(r(4), Err(DropReason::MissingTarget(_))));
        assert_eq!(r(5), Err(DropReason::ChainTooLong));
        // five hops is within the cap
        assert_eq!(r(12).unwrap().page_id, 16);
    }

    #[test]
    fn page_filter() {
        let list = ArticleRecord::from_page(&page(1, "List of sovereign states", None), &stop());
        assert_eq!(list.kind, PageKind::List);
        assert!(!filter_page(&list));
        let ordinary = ArticleRecord::from_page(&page(2, "Menstruation", None), &stop());
        assert!(filter_page(&ordinary));
        let mut dab = page(3, "Member", None);
        dab.markers.insert("disambiguation".into());
        assert!(!filter_page(&ArticleRecord::from_page(&dab, &stop())));
        let dab2 = ArticleRecord::from_page(&page(4, "Hell (disambiguation)", None), &stop());
        assert!(!filter_page(&dab2));
    }

    #[test]
    fn sampling() {
        let pop: Vec<u64> = (100..200).collect();
        assert!(sample_comparison(&pop, 0, 7).unwrap().is_empty());
        let a = sample_comparison(&pop, 10, 7).unwrap();
        let b = sample_comparison(&pop, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_comparison(&pop, 10, 8).unwrap());
        assert!(sample_comparison(&pop, 101, 7).is_err());
        let mut shuffled = pop.clone();
        shuffled.reverse();
        assert_eq!(sample_comparison(&shuffled, 10, 7).unwrap(), a);
    }

    #[test]
    fn samples_are_disjoint_articles() {
        let pages = vec![
            page(1, "Being Bobby Brown", None),
            page(2, "Hell to the no", Some("Being Bobby Brown")),
            page(3, "Hell", None),
            page(4, "Tree", None),
            page(5, "River", None),
            page(6, "Bobby", Some("Being Bobby Brown")),
            page(7, "List of trees", None),
            page(8, "Death", Some("Death#History")),
        ];
        let lex = set(&["hell", "death"]);
        let pop = set(&["hell", "tree", "river", "bobby", "trees", "death"]);
        let m = build_samples(&pages, &lex, &pop, 2, 1, &stop()).unwrap();
        assert_eq!(m.ids(Sample::Taboo), vec![1, 3]);
        // page 1 is taboo via the redirect, so the "Bobby" redirect does not
        // put it in the comparison population
        assert_eq!(m.population_size, 2);
        assert_eq!(m.ids(Sample::Comparison), vec![4, 5]);
        let bbb = m.entries.iter().find(|e| e.page_id == 1).unwrap();
        assert_eq!(bbb.matched_title, "Hell to the no");
        assert_eq!(bbb.ngram, "hell");
        assert!(m.dropped.iter().any(|d| d.page_id == 8));
    }

    #[test]
    fn page_table_roundtrip() {
        let mut p = page(9, "Hell to the no", Some("Being Bobby Brown"));
        p.markers.insert("x".into());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pages.tsv");
        write_page_table(&path, &[p.clone(), page(1, "Being Bobby Brown", None)]).unwrap();
        let back = read_page_table(&path).unwrap();
        assert_eq!(back[0], p);
        assert_eq!(back[1].redirect_target, None);
    }
}
