//! Protection spells from protection-log events.
//!
//! Only edit restrictions count: a protection whose level restricts moves
//! alone never opens a spell. A `protect` or `modify` while a spell is open
//! changes its level (closing one spell and opening the next at the same
//! instant); `unprotect` closes it; an optional expiry closes it early.

use std::path::Path;

use chrono::{DateTime, Utc};
use serde::Deserialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtectionAction {
    Protect,
    Unprotect,
    Modify,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ProtectionEvent {
    #[serde(default)]
    pub page_id: Option<u64>,
    #[serde(default)]
    pub title: Option<String>,
    pub timestamp: DateTime<Utc>,
    pub action: ProtectionAction,
    #[serde(default)]
    pub level: String,
    #[serde(default)]
    pub expiry: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectionSpell {
    pub page_id: u64,
    pub start: DateTime<Utc>,
    /// `None` while still open.
    pub end: Option<DateTime<Utc>>,
    pub level: String,
}

/// Reads line-delimited JSON protection events. Blank lines are skipped.
pub fn read_protection_log(path: &Path) -> Result<Vec<ProtectionEvent>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 1), e.to_string()))
        })
        .collect()
}

/// The edit-restriction level in a protection level string, if any.
///
/// Understands `edit=sysop:move=sysop`, the bracketed log form
/// `[edit=autoconfirmed] (indefinite) [move=sysop] (indefinite)`, and a bare
/// level such as `sysop` (taken as an edit restriction).
pub fn edit_restriction(level: &str) -> Option<String> {
    let level = level.trim();
    if level.contains('=') {
        let pos = level.find("edit=")?;
        let value: String = level[pos + 5..]
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        return (!value.is_empty() && value != "all").then_some(value);
    }
    (!level.is_empty() && level != "all").then(|| level.to_string())
}

struct Open {
    start: DateTime<Utc>,
    level: String,
    expiry: Option<DateTime<Utc>>,
}

fn close(spells: &mut Vec<ProtectionSpell>, page_id: u64, open: Open, at: DateTime<Utc>) {
    if at > open.start {
        spells.push(ProtectionSpell {
            page_id,
            start: open.start,
            end: Some(at),
            level: open.level,
        });
    }
}

/// Builds the spells for one page. Returns spells sorted by start plus a log
/// of ignored events.
pub fn build_protection_spells(
    page_id: u64,
    events: &[ProtectionEvent],
    horizon: DateTime<Utc>,
) -> (Vec<ProtectionSpell>, Vec<String>) {
    let mut ordered: Vec<&ProtectionEvent> = events.iter().collect();
    ordered.sort_by_key(|e| e.timestamp);

    let mut spells = Vec::new();
    let mut warnings = Vec::new();
    let mut open: Option<Open> = None;
    for ev in ordered {
        if let Some(o) = &open {
            if let Some(exp) = o.expiry.filter(|exp| *exp <= ev.timestamp) {
                close(&mut spells, page_id, open.take().unwrap(), exp);
            }
        }
        match ev.action {
            ProtectionAction::Protect | ProtectionAction::Modify => match edit_restriction(&ev.level) {
                Some(level) => {
                    if let Some(o) = &open {
                        if o.level == level && o.expiry == ev.expiry {
                            continue;
                        }
                        close(&mut spells, page_id, open.take().unwrap(), ev.timestamp);
                    }
                    open = Some(Open {
                        start: ev.timestamp,
                        level,
                        expiry: ev.expiry,
                    });
                }
                None => {
                    if let Some(o) = open.take() {
                        close(&mut spells, page_id, o, ev.timestamp);
                    }
                }
            },
            ProtectionAction::Unprotect => match open.take() {
                Some(o) => close(&mut spells, page_id, o, ev.timestamp),
                None => warnings.push(format!(
                    "page {page_id}: unprotect at {} without an open spell",
                    ev.timestamp
                )),
            },
        }
    }
    if let Some(o) = open {
        match o.expiry {
            Some(exp) if exp <= horizon => close(&mut spells, page_id, o, exp),
            _ => spells.push(ProtectionSpell {
                page_id,
                start: o.start,
                end: None,
                level: o.level,
            }),
        }
    }
    (spells, warnings)
}

/// Share of `[cutoff, horizon]` covered by `spells`. Open spells run to the
/// horizon.
pub fn protected_proportion(spells: &[ProtectionSpell], cutoff: DateTime<Utc>, horizon: DateTime<Utc>) -> f64 {
    if horizon <= cutoff {
        return 0.0;
    }
    let mut intervals: Vec<(DateTime<Utc>, DateTime<Utc>)> = spells
        .iter()
        .filter_map(|s| {
            let start = s.start.max(cutoff);
            let end = s.end.unwrap_or(horizon).min(horizon);
            (end > start).then_some((start, end))
        })
        .collect();
    intervals.sort();
    let mut covered = chrono::Duration::zero();
    let mut current: Option<(DateTime<Utc>, DateTime<Utc>)> = None;
    for (s, e) in intervals {
        match current {
            Some((cs, ce)) if s <= ce => current = Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                covered += ce - cs;
                current = Some((s, e));
            }
            None => current = Some((s, e)),
        }
    }
    if let Some((cs, ce)) = current {
        covered += ce - cs;
    }
    let total = (horizon - cutoff).num_milliseconds() as f64;
    (covered.num_milliseconds() as f64 / total).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::month::parse_instant;

    fn t(s: &str) -> DateTime<Utc> {
        parse_instant(s).unwrap()
    }

    fn ev(at: &str, action: ProtectionAction, level: &str) -> ProtectionEvent {
        ProtectionEvent {
            page_id: Some(1),
            title: None,
            timestamp: t(at),
            action,
            level: level.into(),
            expiry: None,
        }
    }

    use ProtectionAction::*;

    #[test]
    fn no_events() {
        let (spells, _) = build_protection_spells(1, &[], t("2020-01-01"));
        assert!(spells.is_empty());
        assert_eq!(protected_proportion(&spells, t("2008-01-01"), t("2020-01-01")), 0.0);
    }

    #[test]
    fn quarter_of_window() {
        let events = [ev("2010-01-01", Protect, "edit=sysop"), ev("2010-01-11", Unprotect, "")];
        let (spells, _) = build_protection_spells(1, &events, t("2010-02-10"));
        assert_eq!(spells.len(), 1);
        let p = protected_proportion(&spells, t("2010-01-01"), t("2010-02-10"));
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn open_spell_runs_to_horizon_and_cutoff_censors() {
        let events = [ev("2005-01-01", Protect, "edit=autoconfirmed:move=autoconfirmed")];
        let (spells, _) = build_protection_spells(1, &events, t("2020-01-01"));
        assert_eq!(spells[0].end, None);
        assert_eq!(protected_proportion(&spells, t("2008-01-01"), t("2020-01-01")), 1.0);
    }

    #[test]
    fn move_only_protection_is_ignored() {
        let events = [ev("2010-01-01", Protect, "[move=sysop] (indefinite)")];
        let (spells, _) = build_protection_spells(1, &events, t("2020-01-01"));
        assert!(spells.is_empty());
    }

    #[test]
    fn level_change_splits_spell() {
        let events = [
            ev("2010-01-01", Protect, "[edit=sysop] (indefinite)"),
            ev("2010-02-01", Modify, "[edit=autoconfirmed] (indefinite)"),
            ev("2010-03-01", Unprotect, ""),
        ];
        let (spells, _) = build_protection_spells(1, &events, t("2020-01-01"));
        assert_eq!(spells.len(), 2);
        assert_eq!(spells[0].end, Some(spells[1].start));
        assert_eq!(spells[1].level, "autoconfirmed");
    }

    #[test]
    fn stray_unprotect_is_logged() {
        let (spells, warnings) = build_protection_spells(1, &[ev("2010-01-01", Unprotect, "")], t("2020-01-01"));
        assert!(spells.is_empty());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn expiry_closes_spell() {
        let mut e = ev("2010-01-01", Protect, "edit=autoconfirmed");
        e.expiry = Some(t("2010-01-08"));
        let (spells, _) = build_protection_spells(1, &[e], t("2020-01-01"));
        assert_eq!(spells[0].end, Some(t("2010-01-08")));
    }

    #[test]
    fn duplicated_events_do_not_change_proportion() {
        let events = vec![
            ev("2009-01-01", Protect, "edit=sysop"),
            ev("2009-06-01", Modify, "edit=autoconfirmed"),
            ev("2010-01-01", Unprotect, ""),
            ev("2012-01-01", Protect, "edit=autoconfirmed"),
        ];
        let mut doubled = events.clone();
        doubled.extend(events.iter().cloned());
        let (a, _) = build_protection_spells(1, &events, t("2020-01-01"));
        let (b, _) = build_protection_spells(1, &doubled, t("2020-01-01"));
        let pa = protected_proportion(&a, t("2008-01-01"), t("2020-01-01"));
        let pb = protected_proportion(&b, t("2008-01-01"), t("2020-01-01"));
        assert_eq!(pa, pb);
        for w in b.windows(2) {
            assert!(w[0].end.unwrap() <= w[1].start);
        }
    }

    #[test]
    fn level_parsing() {
        assert_eq!(edit_restriction("edit=sysop:move=sysop").as_deref(), Some("sysop"));
        assert_eq!(edit_restriction("move=sysop"), None);
        assert_eq!(edit_restriction("edit=all"), None);
        assert_eq!(edit_restriction("semi").as_deref(), Some("semi"));
        assert_eq!(edit_restriction(""), None);
    }

    #[test]
    fn log_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        std::fs::write(
            &path,
            "{\"page_id\": 3, \"timestamp\": \"2009-01-01T00:00:00Z\", \"action\": \"protect\", \"level\": \"edit=sysop\"}\n\n",
        )
        .unwrap();
        let events = read_protection_log(&path).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].action, Protect);
    }
}
