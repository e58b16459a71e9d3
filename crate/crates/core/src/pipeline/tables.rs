//! Stage output tables.

use std::collections::BTreeMap;
use std::path::Path;

use crate::matcher::Sample;
use crate::month::{format_instant, parse_instant};
use crate::revisions::{ArticleMetrics, Contributor, RevisionRecord};
use crate::tsv::{self, TsvWriter};
use crate::{Error, Result};

/// Shortest decimal text that reads back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "NA".into())
}

fn parse_num(s: &str, ctx: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::parse(ctx, format!("bad number `{s}`")))
}

fn parse_opt(s: &str, ctx: &str) -> Result<Option<f64>> {
    if s == "NA" {
        Ok(None)
    } else {
        parse_num(s, ctx).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(s: &str, ctx: &str) -> Result<T> {
    s.parse().map_err(|_| Error::parse(ctx, format!("bad integer `{s}`")))
}

fn parse_bool(s: &str, ctx: &str) -> Result<bool> {
    match s {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(Error::parse(ctx, format!("bad boolean `{s}`"))),
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Reads `path` and returns rows as maps from the requested column names.
fn read_named(path: &Path, names: &[&str]) -> Result<Vec<Vec<String>>> {
    let (header, rows) = tsv::read(path)?;
    let cols = tsv::columns(&header, names, path)?;
    Ok(rows
        .into_iter()
        .map(|row| cols.iter().map(|&c| row.get(c).cloned().unwrap_or_default()).collect())
        .collect())
}

pub fn write_summary(path: &Path, items: &[(&str, String)]) -> Result<()> {
    let mut w = TsvWriter::create(path, &["key", "value"])?;
    for (k, v) in items {
        w.row(&[*k, v.as_str()])?;
    }
    w.finish()
}

pub fn read_summary(path: &Path) -> Result<BTreeMap<String, String>> {
    Ok(read_named(path, &["key", "value"])?
        .into_iter()
        .map(|r| (r[0].clone(), r[1].clone()))
        .collect())
}

const REVISION_COLUMNS: [&str; 7] = [
    "page_id",
    "revision_id",
    "timestamp",
    "contributor",
    "is_reverted",
    "editor_nth_edit",
    "is_damaging",
];

/// Annotated revisions. Contributors must already be redacted.
pub fn write_revisions(path: &Path, revisions: &BTreeMap<u64, Vec<RevisionRecord>>) -> Result<()> {
    let mut w = TsvWriter::create(path, &REVISION_COLUMNS)?;
    for r in revisions.values().flatten() {
        w.row(&[
            r.page_id.to_string(),
            r.revision_id.to_string(),
            format_instant(&r.timestamp),
            r.contributor.encode(),
            flag(r.is_reverted).to_string(),
            r.editor_nth_edit.map(|n| n.to_string()).unwrap_or_else(|| "NA".into()),
            r.is_damaging.map(|d| flag(d).to_string()).unwrap_or_else(|| "NA".into()),
        ])?;
    }
    w.finish()
}

pub fn read_revisions(path: &Path) -> Result<BTreeMap<u64, Vec<RevisionRecord>>> {
    let ctx = path.display().to_string();
    let mut out: BTreeMap<u64, Vec<RevisionRecord>> = BTreeMap::new();
    for row in read_named(path, &REVISION_COLUMNS)? {
        let contributor =
            Contributor::parse(&row[3]).ok_or_else(|| Error::parse(&ctx, format!("bad contributor `{}`", row[3])))?;
        let mut r = RevisionRecord::new(
            parse_int(&row[0], &ctx)?,
            parse_int(&row[1], &ctx)?,
            parse_instant(&row[2])?,
            contributor,
            "",
        );
        r.is_reverted = parse_bool(&row[4], &ctx)?;
        r.editor_nth_edit = if row[5] == "NA" { None } else { Some(parse_int(&row[5], &ctx)?) };
        r.is_damaging = if row[6] == "NA" { None } else { Some(parse_bool(&row[6], &ctx)?) };
        out.entry(r.page_id).or_default().push(r);
    }
    Ok(out)
}

pub fn write_page_values(path: &Path, column: &str, values: &BTreeMap<u64, f64>) -> Result<()> {
    let mut w = TsvWriter::create(path, &["page_id", column])?;
    for (id, v) in values {
        w.row(&[id.to_string(), num(*v)])?;
    }
    w.finish()
}

pub fn read_page_values(path: &Path, column: &str) -> Result<BTreeMap<u64, f64>> {
    let ctx = path.display().to_string();
    read_named(path, &["page_id", column])?
        .into_iter()
        .map(|r| Ok((parse_int(&r[0], &ctx)?, parse_num(&r[1], &ctx)?)))
        .collect()
}

const METRIC_COLUMNS: [&str; 13] = [
    "page_id",
    "sample",
    "n_contributions",
    "n_reverted",
    "n_damaging",
    "revert_rate",
    "damaging_rate",
    "mean_quality",
    "mean_view_rank",
    "protected_proportion",
    "mean_editor_experience",
    "share_no_account",
    "title",
];

pub fn write_metrics(path: &Path, metrics: &[ArticleMetrics], titles: &BTreeMap<u64, String>) -> Result<()> {
    let mut w = TsvWriter::create(path, &METRIC_COLUMNS)?;
    for m in metrics {
        w.row(&[
            m.page_id.to_string(),
            m.sample.as_str().to_string(),
            m.n_contributions.to_string(),
            m.n_reverted.to_string(),
            m.n_damaging.to_string(),
            num(m.revert_rate),
            num(m.damaging_rate),
            opt(m.mean_quality),
            opt(m.mean_view_rank),
            num(m.protected_proportion),
            opt(m.mean_editor_experience),
            num(m.share_no_account),
            titles.get(&m.page_id).cloned().unwrap_or_default(),
        ])?;
    }
    w.finish()
}

pub fn read_metrics(path: &Path) -> Result<Vec<ArticleMetrics>> {
    let ctx = path.display().to_string();
    read_named(path, &METRIC_COLUMNS)?
        .into_iter()
        .map(|r| {
            Ok(ArticleMetrics {
                page_id: parse_int(&r[0], &ctx)?,
                sample: Sample::parse(&r[1]).ok_or_else(|| Error::parse(&ctx, format!("bad sample `{}`", r[1])))?,
                n_contributions: parse_int(&r[2], &ctx)?,
                n_reverted: parse_int(&r[3], &ctx)?,
                n_damaging: parse_int(&r[4], &ctx)?,
                revert_rate: parse_num(&r[5], &ctx)?,
                damaging_rate: parse_num(&r[6], &ctx)?,
                mean_quality: parse_opt(&r[7], &ctx)?,
                mean_view_rank: parse_opt(&r[8], &ctx)?,
                protected_proportion: parse_num(&r[9], &ctx)?,
                mean_editor_experience: parse_opt(&r[10], &ctx)?,
                share_no_account: parse_num(&r[11], &ctx)?,
            })
        })
        .collect()
}

/// One account holder, identified by token.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributorRow {
    pub token: String,
    pub n_revisions: u64,
    pub ever_edited_taboo: bool,
    pub has_user_page: bool,
}

const CONTRIBUTOR_COLUMNS: [&str; 4] = ["contributor", "n_revisions", "ever_edited_taboo", "has_user_page"];

pub fn write_contributors(path: &Path, rows: &[ContributorRow]) -> Result<()> {
    let mut w = TsvWriter::create(path, &CONTRIBUTOR_COLUMNS)?;
    for r in rows {
        w.row(&[
            r.token.clone(),
            r.n_revisions.to_string(),
            flag(r.ever_edited_taboo).into(),
            flag(r.has_user_page).into(),
        ])?;
    }
    w.finish()
}

pub fn read_contributors(path: &Path) -> Result<Vec<ContributorRow>> {
    let ctx = path.display().to_string();
    read_named(path, &CONTRIBUTOR_COLUMNS)?
        .into_iter()
        .map(|r| {
            Ok(ContributorRow {
                token: r[0].clone(),
                n_revisions: parse_int(&r[1], &ctx)?,
                ever_edited_taboo: parse_bool(&r[2], &ctx)?,
                has_user_page: parse_bool(&r[3], &ctx)?,
            })
        })
        .collect()
}

/// Identity attributes of one account holder, identified by token.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub token: String,
    pub has_user_page: bool,
    pub gender_specified: bool,
    pub female: Option<bool>,
    pub emailable: bool,
    pub ever_edited_taboo: bool,
    pub snapshot: String,
}

const PROFILE_COLUMNS: [&str; 7] = [
    "contributor",
    "has_user_page",
    "gender_specified",
    "gender_female",
    "emailable",
    "ever_edited_taboo",
    "snapshot",
];

pub fn write_profiles(path: &Path, rows: &[ProfileRow]) -> Result<()> {
    let mut w = TsvWriter::create(path, &PROFILE_COLUMNS)?;
    for r in rows {
        w.row(&[
            r.token.clone(),
            flag(r.has_user_page).into(),
            flag(r.gender_specified).into(),
            r.female.map(|f| flag(f).to_string()).unwrap_or_else(|| "NA".into()),
            flag(r.emailable).into(),
            flag(r.ever_edited_taboo).into(),
            r.snapshot.clone(),
        ])?;
    }
    w.finish()
}

pub fn read_profiles(path: &Path) -> Result<Vec<ProfileRow>> {
    let ctx = path.display().to_string();
    read_named(path, &PROFILE_COLUMNS)?
        .into_iter()
        .map(|r| {
            Ok(ProfileRow {
                token: r[0].clone(),
                has_user_page: parse_bool(&r[1], &ctx)?,
                gender_specified: parse_bool(&r[2], &ctx)?,
                female: if r[3] == "NA" { None } else { Some(parse_bool(&r[3], &ctx)?) },
                emailable: parse_bool(&r[4], &ctx)?,
                ever_edited_taboo: parse_bool(&r[5], &ctx)?,
                snapshot: r[6].clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScopeRow {
    pub page_id: u64,
    pub sample: Sample,
    pub in_scope: bool,
    pub categories: Vec<String>,
}

const SCOPE_COLUMNS: [&str; 5] = ["page_id", "sample", "in_scope", "n_categories", "categories"];

pub fn write_scope(path: &Path, rows: &[ScopeRow]) -> Result<()> {
    let mut w = TsvWriter::create(path, &SCOPE_COLUMNS)?;
    for r in rows {
        w.row(&[
            r.page_id.to_string(),
            r.sample.as_str().into(),
            flag(r.in_scope).into(),
            r.categories.len().to_string(),
            r.categories.join("|"),
        ])?;
    }
    w.finish()
}

pub fn read_scope(path: &Path) -> Result<Vec<ScopeRow>> {
    let ctx = path.display().to_string();
    read_named(path, &SCOPE_COLUMNS)?
        .into_iter()
        .map(|r| {
            Ok(ScopeRow {
                page_id: parse_int(&r[0], &ctx)?,
                sample: Sample::parse(&r[1]).ok_or_else(|| Error::parse(&ctx, "bad sample"))?,
                in_scope: parse_bool(&r[2], &ctx)?,
                categories: if r[4].is_empty() {
                    Vec::new()
                } else {
                    r[4].split('|').map(String::from).collect()
                },
            })
        })
        .collect()
}
