//! Revision histories: parsing, bot filtering, identity reverts, contributor
//! experience, protection spells and per-article aggregation.

pub mod dump;
mod experience;
mod metrics;
mod protection;
mod reverts;

use std::collections::HashSet;
use std::path::Path;

use chrono::{DateTime, Utc};

pub use experience::{compute_experience, contributor_key};
pub use metrics::{
    aggregate_article_metrics, month_end_revisions, monthly_quality_series, ArticleEnrichment,
    ArticleMetrics,
};
pub use protection::{
    build_protection_spells, edit_restriction, protected_proportion, read_protection_log,
    ProtectionAction, ProtectionEvent, ProtectionSpell,
};
pub use reverts::{annotate_reverts, detect_reverts, RevertDetector};

use crate::month::{format_instant, parse_instant};
use crate::{Error, Result};

/// Revisions are only compared for look-back within this many later revisions.
pub const DEFAULT_REVERT_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Contributor {
    Account(String),
    Anonymous(String),
    Bot(String),
    /// Deleted or suppressed contributor field. Counted as editing without an
    /// account; excluded from experience.
    Suppressed,
}

impl Contributor {
    pub fn has_account(&self) -> bool {
        matches!(self, Contributor::Account(_) | Contributor::Bot(_))
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Contributor::Account(n) | Contributor::Bot(n) | Contributor::Anonymous(n) => Some(n),
            Contributor::Suppressed => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Contributor::Account(_) => "account",
            Contributor::Anonymous(_) => "anonymous",
            Contributor::Bot(_) => "bot",
            Contributor::Suppressed => "suppressed",
        }
    }

    /// Parses the fixture encoding `user:NAME`, `ip:ADDR`, `bot:NAME` or
    /// `suppressed`.
    pub fn parse(s: &str) -> Option<Self> {
        if s == "suppressed" {
            return Some(Contributor::Suppressed);
        }
        let (kind, value) = s.split_once(':')?;
        let value = value.to_string();
        match kind {
            "user" => Some(Contributor::Account(value)),
            "ip" => Some(Contributor::Anonymous(value)),
            "bot" => Some(Contributor::Bot(value)),
            _ => None,
        }
    }

    pub fn encode(&self) -> String {
        match self {
            Contributor::Account(n) => format!("user:{n}"),
            Contributor::Anonymous(n) => format!("ip:{n}"),
            Contributor::Bot(n) => format!("bot:{n}"),
            Contributor::Suppressed => "suppressed".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevisionRecord {
    pub revision_id: u64,
    pub page_id: u64,
    pub timestamp: DateTime<Utc>,
    pub contributor: Contributor,
    pub checksum: String,
    pub is_reverted: bool,
    pub is_damaging: Option<bool>,
    /// `None` for suppressed contributors.
    pub editor_nth_edit: Option<u64>,
}

impl RevisionRecord {
    pub fn new(
        page_id: u64,
        revision_id: u64,
        timestamp: DateTime<Utc>,
        contributor: Contributor,
        checksum: impl Into<String>,
    ) -> Self {
        RevisionRecord {
            revision_id,
            page_id,
            timestamp,
            contributor,
            checksum: checksum.into(),
            is_reverted: false,
            is_damaging: None,
            editor_nth_edit: None,
        }
    }
}

/// Orders one page's revisions by `(timestamp, revision_id)`.
pub fn sort_page_revisions(revisions: &mut [RevisionRecord]) {
    revisions.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then(a.revision_id.cmp(&b.revision_id))
    });
}

/// Union of bot names from one or more word-per-line lists.
///
/// Lines starting with `#` are comments; a `User:` prefix is stripped. A
/// missing file is a configuration error.
pub fn load_bot_lists(paths: &[impl AsRef<Path>]) -> Result<HashSet<String>> {
    let mut bots = HashSet::new();
    for path in paths {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("bot list {}: {e}", path.display())))?;
        for line in text.lines() {
            let name = line.trim();
            if name.is_empty() || name.starts_with('#') {
                continue;
            }
            let name = name.strip_prefix("User:").unwrap_or(name);
            bots.insert(name.to_string());
        }
    }
    Ok(bots)
}

/// Drops bot revisions: explicit [`Contributor::Bot`]s and accounts whose name
/// is on the bot list.
pub fn filter_bots(revisions: Vec<RevisionRecord>, bot_names: &HashSet<String>) -> Vec<RevisionRecord> {
    revisions
        .into_iter()
        .filter(|r| match &r.contributor {
            Contributor::Bot(_) => false,
            Contributor::Account(name) => !bot_names.contains(name),
            _ => true,
        })
        .collect()
}

/// Reads the line-delimited fixture format:
/// `page_id<TAB>revision_id<TAB>timestamp<TAB>contributor<TAB>checksum`.
pub fn read_revision_fixture(path: &Path) -> Result<Vec<RevisionRecord>> {
    let (header, rows) = crate::tsv::read(path)?;
    let cols = crate::tsv::columns(
        &header,
        &["page_id", "revision_id", "timestamp", "contributor", "checksum"],
        path,
    )?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let ctx = || format!("{}:{}", path.display(), i + 2);
            let field = |c: usize| row.get(cols[c]).map(String::as_str).unwrap_or("");
            Ok(RevisionRecord::new(
                field(0).parse().map_err(|_| Error::parse(ctx(), "bad page_id"))?,
                field(1).parse().map_err(|_| Error::parse(ctx(), "bad revision_id"))?,
                parse_instant(field(2))?,
                Contributor::parse(field(3)).ok_or_else(|| Error::parse(ctx(), "bad contributor"))?,
                field(4),
            ))
        })
        .collect()
}

pub fn write_revision_fixture(path: &Path, revisions: &[RevisionRecord]) -> Result<()> {
    let mut w = crate::tsv::TsvWriter::create(
        path,
        &["page_id", "revision_id", "timestamp", "contributor", "checksum"],
    )?;
    for r in revisions {
        w.row(&[
            r.page_id.to_string(),
            r.revision_id.to_string(),
            format_instant(&r.timestamp),
            r.contributor.encode(),
            r.checksum.clone(),
        ])?;
    }
    w.finish()
}
