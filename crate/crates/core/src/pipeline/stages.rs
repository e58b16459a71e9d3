//! The stage bodies. Each reads its inputs from files and writes its outputs
//! into one directory, so stages can also be run one at a time from the
//! command line.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use super::redact::Redactor;
use super::tables::{self, ContributorRow, ProfileRow, ScopeRow};
use crate::dictionary::{
    filter_senses, parse_dictionary_file, read_documents, to_documents, write_documents, FilterConfig,
    StopwordConfig,
};
use crate::enrichment::{
    self, fetch_categories, fetch_user_attributes, rank_views, read_pageviews, score_damaging, score_quality,
    ApiEndpoint, Client, ScoringEndpoint,
};
use crate::lexicon::{induce_lexicon, ngram_population, InductionParams, NgramRange, TabooLexicon};
use crate::matcher::{build_samples, read_page_table, title_key, write_page_table, PageRecord, Sample, SampleManifest};
use crate::month::{format_instant, YearMonth};
use crate::revisions::dump::DumpReader;
use crate::revisions::{
    aggregate_article_metrics, annotate_reverts, build_protection_spells, compute_experience, filter_bots,
    load_bot_lists, month_end_revisions, protected_proportion, read_protection_log, read_revision_fixture,
    sort_page_revisions, ArticleEnrichment, Contributor, ProtectionEvent, RevisionRecord,
};
use crate::tsv::TsvWriter;
use crate::{Error, Result};

/// Union of word-per-line stop-word files; the built-in English list when
/// `paths` is empty.
pub fn load_stopwords(paths: &[PathBuf]) -> Result<StopwordConfig> {
    if paths.is_empty() {
        return Ok(StopwordConfig::english());
    }
    let mut words = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        words.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        );
    }
    Ok(StopwordConfig::from_words(words))
}

// ---------------------------------------------------------------- ingest

pub fn ingest(dictionary: &Path, stopwords: &StopwordConfig, out: &Path) -> Result<()> {
    let (senses, errors) = parse_dictionary_file(dictionary)?;
    let parsed = senses.len();
    let kept = filter_senses(senses, &FilterConfig::default());
    let docs = to_documents(&kept, stopwords);
    write_documents(&out.join("documents.tsv"), &docs)?;
    let mut w = TsvWriter::create(&out.join("parse_errors.tsv"), &["line", "message"])?;
    for e in &errors {
        w.row(&[e.line.to_string(), e.message.clone()])?;
    }
    w.finish()?;
    tables::write_summary(
        &out.join("summary.tsv"),
        &[
            ("malformed_lines", errors.len().to_string()),
            ("senses_parsed", parsed.to_string()),
            ("senses_kept", kept.len().to_string()),
            ("euphemistic_senses", kept.iter().filter(|s| s.euphemistic).count().to_string()),
            ("documents", docs.len().to_string()),
        ],
    )
}

// ---------------------------------------------------------------- induce

pub fn induce(documents: &Path, params: &InductionParams, out: &Path) -> Result<()> {
    let docs = read_documents(documents)?;
    let induction = induce_lexicon(&docs, params)?;
    induction.lexicon.write(&out.join("lexicon.tsv"))?;
    tables::write_summary(
        &out.join("summary.tsv"),
        &[
            ("documents", induction.n_docs.to_string()),
            ("features", induction.n_features.to_string()),
            ("nonzeros", induction.nnz.to_string()),
            ("cg_iterations", induction.iterations.to_string()),
            ("lexicon_size", induction.lexicon.len().to_string()),
        ],
    )
}

// ---------------------------------------------------------------- match

fn is_revision_fixture(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "tsv")
}

/// Namespace-0 page metadata from an XML export, or from a page table when
/// the path ends in `.tsv`.
pub fn read_pages(path: &Path) -> Result<Vec<PageRecord>> {
    if is_revision_fixture(path) {
        return read_page_table(path);
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pages = Vec::new();
    for page in DumpReader::new(BufReader::new(file)) {
        let page = page?;
        if page.ns == 0 {
            pages.push(page.to_page_record());
        }
    }
    pages.sort_by_key(|p| p.page_id);
    Ok(pages)
}

pub struct MatchArgs<'a> {
    pub lexicon: &'a Path,
    pub documents: &'a Path,
    pub pages: &'a Path,
    pub ngram_range: NgramRange,
    pub comparison_size: usize,
    pub seed: u64,
    pub stopwords: &'a StopwordConfig,
}

pub fn match_articles(args: &MatchArgs<'_>, out: &Path) -> Result<()> {
    let lexicon = TabooLexicon::read(args.lexicon)?;
    let lexicon_ngrams: HashSet<String> = lexicon.ngrams().map(String::from).collect();
    let docs = read_documents(args.documents)?;
    let population = ngram_population(&docs, args.ngram_range);
    let pages = read_pages(args.pages)?;
    write_page_table(&out.join("pages.tsv"), &pages)?;
    let manifest = build_samples(
        &pages,
        &lexicon_ngrams,
        &population,
        args.comparison_size,
        args.seed,
        args.stopwords,
    )?;
    manifest.write(&out.join("manifest.tsv"))?;
    manifest.write_dropped(&out.join("dropped.tsv"))?;
    tables::write_summary(
        &out.join("summary.tsv"),
        &[
            ("pages", pages.len().to_string()),
            ("taboo_articles", manifest.ids(Sample::Taboo).len().to_string()),
            ("comparison_population", manifest.population_size.to_string()),
            ("comparison_articles", manifest.ids(Sample::Comparison).len().to_string()),
            ("dropped_matches", manifest.dropped.len().to_string()),
            ("seed", manifest.seed.to_string()),
        ],
    )
}

// ---------------------------------------------------------------- analyze

pub struct Histories {
    pub revisions: BTreeMap<u64, Vec<RevisionRecord>>,
    /// Account name -> creation time of its user page.
    pub user_pages: HashMap<String, DateTime<Utc>>,
}

/// Revisions of the `wanted` pages, plus user-page creation times when the
/// source is an XML export.
pub fn load_histories(dump: &Path, wanted: &HashSet<u64>) -> Result<Histories> {
    let mut revisions: BTreeMap<u64, Vec<RevisionRecord>> = BTreeMap::new();
    let mut user_pages = HashMap::new();
    if is_revision_fixture(dump) {
        for r in read_revision_fixture(dump)? {
            if wanted.contains(&r.page_id) {
                revisions.entry(r.page_id).or_default().push(r);
            }
        }
        return Ok(Histories { revisions, user_pages });
    }
    let file = File::open(dump).map_err(|e| Error::io(dump, e))?;
    for page in DumpReader::new(BufReader::new(file)) {
        let page = page?;
        match page.ns {
            0 if wanted.contains(&page.page_id) => {
                let revs = revisions.entry(page.page_id).or_default();
                for r in &page.revisions {
                    revs.push(RevisionRecord::new(
                        page.page_id,
                        r.id,
                        r.timestamp,
                        r.contributor.clone(),
                        r.checksum.clone(),
                    ));
                }
            }
            2 => {
                let name = page.title.split_once(':').map(|(_, n)| n).unwrap_or(&page.title);
                if name.contains('/') {
                    continue;
                }
                if let Some(created) = page.revisions.iter().map(|r| r.timestamp).min() {
                    let e = user_pages.entry(name.to_string()).or_insert(created);
                    *e = (*e).min(created);
                }
            }
            _ => {}
        }
    }
    Ok(Histories { revisions, user_pages })
}

pub struct AnalyzeArgs<'a> {
    pub dump: &'a Path,
    pub bot_lists: &'a [PathBuf],
    pub protection_log: &'a Path,
    pub manifest: &'a Path,
    pub window: usize,
    pub cutoff: DateTime<Utc>,
    pub horizon: DateTime<Utc>,
}

fn event_page(ev: &ProtectionEvent, wanted: &HashSet<u64>, by_title: &HashMap<String, u64>) -> Option<u64> {
    ev.page_id
        .filter(|id| wanted.contains(id))
        .or_else(|| ev.title.as_deref().and_then(|t| by_title.get(&title_key(t)).copied()))
}

pub fn analyze(args: &AnalyzeArgs<'_>, redactor: &mut Redactor, out: &Path) -> Result<()> {
    let manifest = SampleManifest::read(args.manifest)?;
    let wanted: HashSet<u64> = manifest.entries.iter().map(|e| e.page_id).collect();
    let by_title: HashMap<String, u64> = manifest.entries.iter().map(|e| (title_key(&e.title), e.page_id)).collect();
    let bots = load_bot_lists(args.bot_lists)?;
    let Histories { revisions, user_pages } = load_histories(args.dump, &wanted)?;

    let raw_count: usize = revisions.values().map(Vec::len).sum();
    let mut after_bots = 0;
    let mut all: Vec<RevisionRecord> = Vec::with_capacity(raw_count);
    for (_, revs) in revisions {
        let mut revs = filter_bots(revs, &bots);
        after_bots += revs.len();
        revs.retain(|r| r.timestamp <= args.horizon);
        sort_page_revisions(&mut revs);
        annotate_reverts(&mut revs, args.window);
        all.extend(revs);
    }
    compute_experience(&mut all);

    // account holders: contribution times and whether they touched a taboo page
    let mut contributions: HashMap<String, Vec<DateTime<Utc>>> = HashMap::new();
    let mut taboo_editors: HashSet<String> = HashSet::new();
    for r in &all {
        if let Contributor::Account(name) = &r.contributor {
            contributions.entry(name.clone()).or_default().push(r.timestamp);
            if manifest.sample_of(r.page_id) == Some(Sample::Taboo) {
                taboo_editors.insert(name.clone());
            }
        }
    }
    let user_page = enrichment::user_page_flags(&user_pages, &contributions);
    let mut contributor_rows: Vec<ContributorRow> = contributions
        .iter()
        .map(|(name, times)| ContributorRow {
            token: redactor.token("user", name),
            n_revisions: times.len() as u64,
            ever_edited_taboo: taboo_editors.contains(name),
            has_user_page: user_page.get(name).copied().unwrap_or(false),
        })
        .collect();
    contributor_rows.sort_by(|a, b| a.token.cmp(&b.token));

    let mut grouped: BTreeMap<u64, Vec<RevisionRecord>> = BTreeMap::new();
    for mut r in all {
        r.contributor = redactor.contributor(&r.contributor);
        grouped.entry(r.page_id).or_default().push(r);
    }
    for revs in grouped.values_mut() {
        sort_page_revisions(revs);
    }
    let retained: usize = grouped.values().map(Vec::len).sum();
    let reverted: usize = grouped.values().flatten().filter(|r| r.is_reverted).count();

    // protection
    let events = read_protection_log(args.protection_log)?;
    let mut by_page: BTreeMap<u64, Vec<ProtectionEvent>> = BTreeMap::new();
    let mut unmatched_events = 0;
    for ev in events {
        match event_page(&ev, &wanted, &by_title) {
            Some(id) => by_page.entry(id).or_default().push(ev),
            None => unmatched_events += 1,
        }
    }
    let mut warnings = Vec::new();
    let mut proportions = BTreeMap::new();
    let mut spells_out = TsvWriter::create(&out.join("protection_spells.tsv"), &["page_id", "start", "end", "level"])?;
    for &id in wanted.iter().collect::<BTreeSet<_>>() {
        let events = by_page.get(&id).map(Vec::as_slice).unwrap_or(&[]);
        let (spells, warn) = build_protection_spells(id, events, args.horizon);
        for w in warn {
            log::warn!("{w}");
            warnings.push(w);
        }
        for s in &spells {
            spells_out.row(&[
                id.to_string(),
                format_instant(&s.start),
                s.end.map(|e| format_instant(&e)).unwrap_or_else(|| "open".into()),
                s.level.clone(),
            ])?;
        }
        proportions.insert(id, protected_proportion(&spells, args.cutoff, args.horizon));
    }
    spells_out.finish()?;

    tables::write_revisions(&out.join("revisions.tsv"), &grouped)?;
    tables::write_contributors(&out.join("contributors.tsv"), &contributor_rows)?;
    tables::write_page_values(&out.join("protection.tsv"), "protected_proportion", &proportions)?;
    let mut w = TsvWriter::create(&out.join("warnings.tsv"), &["message"])?;
    for m in &warnings {
        w.row(&[m])?;
    }
    w.finish()?;
    tables::write_summary(
        &out.join("summary.tsv"),
        &[
            ("revisions_read", raw_count.to_string()),
            ("bot_revisions_removed", (raw_count - after_bots).to_string()),
            ("revisions_after_horizon_removed", (after_bots - retained).to_string()),
            ("revisions_retained", retained.to_string()),
            ("revisions_reverted", reverted.to_string()),
            ("account_holders", contributor_rows.len().to_string()),
            ("protection_events_unmatched", unmatched_events.to_string()),
            ("protection_warnings", warnings.len().to_string()),
        ],
    )?;
    redactor.save()
}

// ---------------------------------------------------------------- enrich

/// Month-end quality per article: `(page_id, month, revision_id, quality)`
/// rows plus the number of month-end revisions that could not be scored.
pub fn quality_series(
    revisions: &BTreeMap<u64, Vec<RevisionRecord>>,
    client: &Client,
    endpoint: &ScoringEndpoint,
    horizon: DateTime<Utc>,
) -> (Vec<(u64, YearMonth, u64, f64)>, usize) {
    let month_ends: BTreeMap<u64, Vec<(YearMonth, u64)>> = revisions
        .iter()
        .map(|(&id, revs)| (id, month_end_revisions(revs, horizon)))
        .collect();
    let ids: Vec<u64> = month_ends.values().flatten().map(|(_, r)| *r).collect();
    let scored = score_quality(&ids, client, endpoint);
    let mut rows = Vec::new();
    for (&page, months) in &month_ends {
        for &(m, rev) in months {
            if let Some(q) = scored.scores.get(&rev) {
                rows.push((page, m, rev, q.scalar));
            }
        }
    }
    (rows, scored.unavailable.len())
}

pub fn write_quality_series(path: &Path, rows: &[(u64, YearMonth, u64, f64)], manifest: &SampleManifest) -> Result<()> {
    let mut w = TsvWriter::create(path, &["page_id", "sample", "month", "revision_id", "quality"])?;
    for (page, m, rev, q) in rows {
        let sample = manifest.sample_of(*page).map(Sample::as_str).unwrap_or("");
        w.row(&[page.to_string(), sample.into(), m.to_string(), rev.to_string(), tables::num(*q)])?;
    }
    w.finish()
}

/// Sets `is_damaging` on every revision that could be scored; returns the
/// number that could not.
pub fn mark_damaging(
    revisions: &mut BTreeMap<u64, Vec<RevisionRecord>>,
    client: &Client,
    endpoint: &ScoringEndpoint,
    threshold: f64,
    out: &Path,
) -> Result<usize> {
    let ids: Vec<u64> = revisions.values().flatten().map(|r| r.revision_id).collect();
    let scored = score_damaging(&ids, client, endpoint, threshold);
    let mut w = TsvWriter::create(out, &["revision_id", "damaging_probability", "damaging"])?;
    for s in scored.scores.values() {
        w.row(&[s.revision_id.to_string(), tables::num(s.probability), u8::from(s.damaging).to_string()])?;
    }
    w.finish()?;
    for r in revisions.values_mut().flatten() {
        r.is_damaging = scored.scores.get(&r.revision_id).map(|s| s.damaging);
    }
    Ok(scored.unavailable.len())
}

pub fn view_ranks(pageviews: &Path, manifest: &SampleManifest) -> Result<(BTreeMap<u64, f64>, Vec<u64>)> {
    let titles: HashMap<String, u64> = manifest.entries.iter().map(|e| (title_key(&e.title), e.page_id)).collect();
    let records = read_pageviews(pageviews, &titles)?;
    let ids: Vec<u64> = manifest.entries.iter().map(|e| e.page_id).collect();
    Ok(rank_views(&records, &ids))
}

pub fn profiles(
    contributors: &[ContributorRow],
    redactor: &Redactor,
    client: &Client,
    endpoint: &ApiEndpoint,
    snapshot: DateTime<Utc>,
) -> Result<(Vec<ProfileRow>, usize)> {
    let mut token_of: HashMap<String, String> = HashMap::new();
    let mut user_pages = HashMap::new();
    let mut taboo = HashSet::new();
    for c in contributors {
        let name = redactor
            .name_of(&c.token)
            .ok_or_else(|| Error::Config(format!("no identity recorded for {}", c.token)))?
            .to_string();
        user_pages.insert(name.clone(), c.has_user_page);
        if c.ever_edited_taboo {
            taboo.insert(name.clone());
        }
        token_of.insert(name, c.token.clone());
    }
    let names: Vec<String> = token_of.keys().cloned().collect();
    let (profiles, flagged) = fetch_user_attributes(&names, client, endpoint, &user_pages, &taboo, snapshot);
    let mut rows: Vec<ProfileRow> = profiles
        .into_iter()
        .map(|p| ProfileRow {
            token: token_of[&p.name].clone(),
            has_user_page: p.has_user_page,
            gender_specified: p.gender_specified,
            female: p.gender_value.map(|g| g == enrichment::Gender::Female),
            emailable: p.emailable,
            ever_edited_taboo: p.ever_edited_taboo,
            snapshot: format_instant(&p.snapshot),
        })
        .collect();
    rows.sort_by(|a, b| a.token.cmp(&b.token));
    Ok((rows, flagged.len()))
}

pub fn scope(manifest: &SampleManifest, client: &Client, endpoint: &ApiEndpoint, marker: &str) -> Vec<ScopeRow> {
    let titles: Vec<String> = manifest.entries.iter().map(|e| e.title.clone()).collect();
    let records: HashMap<String, enrichment::CategoryRecord> = fetch_categories(&titles, client, endpoint, marker)
        .into_iter()
        .map(|r| (r.title.clone(), r))
        .collect();
    let mut rows: Vec<ScopeRow> = manifest
        .entries
        .iter()
        .map(|e| {
            let rec = &records[&e.title];
            ScopeRow {
                page_id: e.page_id,
                sample: e.sample,
                in_scope: rec.in_scope,
                categories: rec.categories.iter().cloned().collect(),
            }
        })
        .collect();
    rows.sort_by_key(|r| r.page_id);
    rows
}

pub struct EnrichArgs<'a> {
    pub manifest: &'a Path,
    pub analyze_dir: &'a Path,
    pub pageviews: &'a Path,
    pub quality: &'a Client,
    pub damaging: &'a Client,
    pub users: &'a Client,
    pub categories: &'a Client,
    pub scoring: ScoringEndpoint,
    pub api: ApiEndpoint,
    pub damaging_threshold: f64,
    pub scope_marker: &'a str,
    pub horizon: DateTime<Utc>,
    pub snapshot: DateTime<Utc>,
}

pub fn enrich(args: &EnrichArgs<'_>, redactor: &Redactor, out: &Path) -> Result<()> {
    let manifest = SampleManifest::read(args.manifest)?;
    let mut revisions = tables::read_revisions(&args.analyze_dir.join("revisions.tsv"))?;
    let contributors = tables::read_contributors(&args.analyze_dir.join("contributors.tsv"))?;
    let protection = tables::read_page_values(&args.analyze_dir.join("protection.tsv"), "protected_proportion")?;

    let (quality_rows, quality_missing) = quality_series(&revisions, args.quality, &args.scoring, args.horizon);
    write_quality_series(&out.join("quality_monthly.tsv"), &quality_rows, &manifest)?;
    let mut quality_sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for (page, _, _, q) in &quality_rows {
        let e = quality_sums.entry(*page).or_insert((0.0, 0));
        e.0 += q;
        e.1 += 1;
    }

    let damaging_missing = mark_damaging(
        &mut revisions,
        args.damaging,
        &args.scoring,
        args.damaging_threshold,
        &out.join("revision_scores.tsv"),
    )?;

    let (ranks, no_views) = view_ranks(args.pageviews, &manifest)?;
    tables::write_page_values(&out.join("view_ranks.tsv"), "mean_view_rank", &ranks)?;

    let (profile_rows, flagged_accounts) = profiles(&contributors, redactor, args.users, &args.api, args.snapshot)?;
    tables::write_profiles(&out.join("profiles.tsv"), &profile_rows)?;

    let scope_rows = scope(&manifest, args.categories, &args.api, args.scope_marker);
    tables::write_scope(&out.join("categories.tsv"), &scope_rows)?;

    let enrichments: HashMap<u64, ArticleEnrichment> = manifest
        .entries
        .iter()
        .map(|e| {
            let id = e.page_id;
            (
                id,
                ArticleEnrichment {
                    mean_quality: quality_sums.get(&id).map(|(s, n)| s / *n as f64),
                    mean_view_rank: ranks.get(&id).copied(),
                    protected_proportion: protection.get(&id).copied().unwrap_or(0.0),
                },
            )
        })
        .collect();
    let articles: Vec<(u64, Sample)> = manifest.entries.iter().map(|e| (e.page_id, e.sample)).collect();
    let (metrics, excluded) = aggregate_article_metrics(&articles, &revisions, &enrichments);
    let titles: BTreeMap<u64, String> = manifest.entries.iter().map(|e| (e.page_id, e.title.clone())).collect();
    tables::write_metrics(&out.join("article_metrics.tsv"), &metrics, &titles)?;
    let mut w = TsvWriter::create(&out.join("excluded.tsv"), &["reason"])?;
    for m in &excluded {
        log::warn!("{m}");
        w.row(&[m])?;
    }
    w.finish()?;

    for client in [args.quality, args.damaging, args.users, args.categories] {
        client.save_cache()?;
    }
    tables::write_summary(
        &out.join("summary.tsv"),
        &[
            ("articles_with_metrics", metrics.len().to_string()),
            ("articles_excluded", excluded.len().to_string()),
            ("quality_unavailable", quality_missing.to_string()),
            ("damaging_unavailable", damaging_missing.to_string()),
            ("articles_without_views", no_views.len().to_string()),
            ("profiles", profile_rows.len().to_string()),
            ("accounts_missing_or_unscored", flagged_accounts.to_string()),
            ("articles_in_scope", scope_rows.iter().filter(|r| r.in_scope).count().to_string()),
        ],
    )
}
