//! Streaming reader for MediaWiki XML exports (pages-articles and
//! pages-meta-history).
//!
//! Yields one [`DumpPage`] at a time with its revisions in file order.
//! Revision text is hashed (when the dump lacks a `sha1`) and then discarded;
//! only the text of the last revision of each page is kept long enough to
//! detect disambiguation templates and wikitext redirects.

use std::collections::BTreeSet;
use std::io::BufRead;

use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use sha2::{Digest, Sha256};

use super::Contributor;
use crate::matcher::PageRecord;
use crate::{Error, Result};

const DISAMBIGUATION_TEMPLATES: &[&str] = &["disambiguation", "disambig", "dab", "disamb", "hndis", "geodis"];

#[derive(Debug, Clone, PartialEq)]
pub struct DumpRevision {
    pub id: u64,
    pub timestamp: DateTime<Utc>,
    pub contributor: Contributor,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpPage {
    pub page_id: u64,
    pub ns: i64,
    pub title: String,
    pub redirect: Option<String>,
    pub markers: BTreeSet<String>,
    pub revisions: Vec<DumpRevision>,
}

impl DumpPage {
    pub fn to_page_record(&self) -> PageRecord {
        PageRecord {
            page_id: self.page_id,
            title: self.title.clone(),
            redirect_target: self.redirect.clone(),
            markers: self.markers.clone(),
        }
    }
}

#[derive(Default)]
struct PageBuilder {
    id: Option<u64>,
    ns: i64,
    title: String,
    redirect: Option<String>,
    revisions: Vec<DumpRevision>,
    last_text: Option<String>,
}

#[derive(Default)]
struct RevisionBuilder {
    id: Option<u64>,
    timestamp: Option<String>,
    username: Option<String>,
    ip: Option<String>,
    contributor_deleted: bool,
    sha1: Option<String>,
    text_sha1: Option<String>,
    text: Option<String>,
}

pub struct DumpReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    stack: Vec<Vec<u8>>,
    text: String,
    page: Option<PageBuilder>,
    revision: Option<RevisionBuilder>,
    done: bool,
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(input: R) -> Self {
        let mut reader = Reader::from_reader(input);
        reader.config_mut().trim_text(false);
        DumpReader {
            reader,
            buf: Vec::new(),
            stack: Vec::new(),
            text: String::new(),
            page: None,
            revision: None,
            done: false,
        }
    }

    fn xml_err(&self, e: impl std::fmt::Display) -> Error {
        Error::Xml(format!("at byte {}: {e}", self.reader.buffer_position()))
    }

    fn parent_is(&self, name: &[u8]) -> bool {
        self.stack.len() >= 2 && self.stack[self.stack.len() - 2] == name
    }

    fn on_start(&mut self, e: &BytesStart<'_>, empty: bool) -> Result<()> {
        let name = e.name().as_ref().to_vec();
        match name.as_slice() {
            b"page" => self.page = Some(PageBuilder::default()),
            b"revision" => self.revision = Some(RevisionBuilder::default()),
            b"redirect" => {
                if let Some(page) = self.page.as_mut() {
                    for attr in e.attributes() {
                        let attr = attr.map_err(|e| Error::Xml(e.to_string()))?;
                        if attr.key.as_ref() == b"title" {
                            let v = attr.unescape_value().map_err(|e| Error::Xml(e.to_string()))?;
                            page.redirect = Some(v.into_owned());
                        }
                    }
                }
            }
            b"contributor" => {
                if let Some(rev) = self.revision.as_mut() {
                    for attr in e.attributes().flatten() {
                        if attr.key.as_ref() == b"deleted" {
                            rev.contributor_deleted = true;
                        }
                    }
                }
            }
            b"text" => {
                if let Some(rev) = self.revision.as_mut() {
                    for attr in e.attributes().flatten() {
                        if attr.key.as_ref() == b"sha1" {
                            rev.text_sha1 = attr.unescape_value().ok().map(|v| v.into_owned());
                        }
                    }
                }
            }
            _ => {}
        }
        if !empty {
            self.stack.push(name);
            self.text.clear();
        }
        Ok(())
    }

    fn on_end(&mut self) -> Result<Option<DumpPage>> {
        let name = match self.stack.last() {
            Some(n) => n.clone(),
            None => return Ok(None),
        };
        let text = std::mem::take(&mut self.text);
        let in_revision = self.revision.is_some();
        let mut finished = None;
        match name.as_slice() {
            b"title" if self.parent_is(b"page") => {
                if let Some(p) = self.page.as_mut() {
                    p.title = text;
                }
            }
            b"ns" if self.parent_is(b"page") => {
                let ns = text.trim().parse().map_err(|_| self.xml_err("bad <ns>"))?;
                if let Some(p) = self.page.as_mut() {
                    p.ns = ns;
                }
            }
            b"id" if self.parent_is(b"page") => {
                let id = text.trim().parse().map_err(|_| self.xml_err("bad page <id>"))?;
                if let Some(p) = self.page.as_mut() {
                    p.id = Some(id);
                }
            }
            b"id" if self.parent_is(b"revision") => {
                let id = text.trim().parse().map_err(|_| self.xml_err("bad revision <id>"))?;
                if let Some(r) = self.revision.as_mut() {
                    r.id = Some(id);
                }
            }
            b"timestamp" if in_revision => self.revision.as_mut().unwrap().timestamp = Some(text),
            b"username" if in_revision => self.revision.as_mut().unwrap().username = Some(text),
            b"ip" if in_revision => self.revision.as_mut().unwrap().ip = Some(text),
            b"sha1" if self.parent_is(b"revision") => {
                let v = text.trim().to_string();
                if !v.is_empty() {
                    self.revision.as_mut().unwrap().sha1 = Some(v);
                }
            }
            b"text" if in_revision => self.revision.as_mut().unwrap().text = Some(text),
            b"revision" => {
                let rev = self.revision.take().unwrap_or_default();
                let (built, body) = self.finish_revision(rev)?;
                if let Some(p) = self.page.as_mut() {
                    p.revisions.push(built);
                    p.last_text = body;
                }
            }
            b"page" => {
                if let Some(p) = self.page.take() {
                    finished = Some(finish_page(p).map_err(|m| self.xml_err(m))?);
                }
            }
            _ => {}
        }
        self.stack.pop();
        Ok(finished)
    }

    fn finish_revision(&self, rev: RevisionBuilder) -> Result<(DumpRevision, Option<String>)> {
        let id = rev.id.ok_or_else(|| self.xml_err("revision without <id>"))?;
        let ts = rev
            .timestamp
            .ok_or_else(|| self.xml_err(format!("revision {id} without <timestamp>")))?;
        let timestamp = DateTime::parse_from_rfc3339(ts.trim())
            .map_err(|e| self.xml_err(format!("revision {id}: {e}")))?
            .with_timezone(&Utc);
        let contributor = if rev.contributor_deleted {
            Contributor::Suppressed
        } else if let Some(name) = rev.username {
            Contributor::Account(name)
        } else if let Some(ip) = rev.ip {
            Contributor::Anonymous(ip)
        } else {
            Contributor::Suppressed
        };
        let checksum = match (rev.sha1, rev.text_sha1, &rev.text) {
            (Some(s), _, _) | (None, Some(s), _) => s,
            (None, None, Some(body)) => content_digest(body),
            (None, None, None) => content_digest(""),
        };
        Ok((
            DumpRevision {
                id,
                timestamp,
                contributor,
                checksum,
            },
            rev.text,
        ))
    }
}

fn finish_page(p: PageBuilder) -> std::result::Result<DumpPage, String> {
    let page_id = p.id.ok_or_else(|| format!("page `{}` without <id>", p.title))?;
    let body = p.last_text.unwrap_or_default();
    let redirect = p.redirect.or_else(|| wikitext_redirect(&body));
    Ok(DumpPage {
        page_id,
        ns: p.ns,
        title: p.title,
        redirect,
        markers: markers_in(&body),
        revisions: p.revisions,
    })
}

/// Hex SHA-256 of revision text, used when the dump has no digest.
pub fn content_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn wikitext_redirect(body: &str) -> Option<String> {
    let trimmed = body.trim_start();
    if !trimmed.get(..9)?.eq_ignore_ascii_case("#redirect") {
        return None;
    }
    let open = trimmed.find("[[")?;
    let close = trimmed[open..].find("]]")? + open;
    let target = trimmed[open + 2..close].split('|').next()?.trim();
    (!target.is_empty()).then(|| target.to_string())
}

/// Page markers derived from wikitext: currently only `disambiguation`.
pub fn markers_in(body: &str) -> BTreeSet<String> {
    let mut markers = BTreeSet::new();
    let lower = body.to_lowercase();
    let mut rest = lower.as_str();
    while let Some(pos) = rest.find("{{") {
        rest = &rest[pos + 2..];
        let end = rest.find(['|', '}']).unwrap_or(rest.len());
        let name = rest[..end].trim().replace('_', " ");
        if DISAMBIGUATION_TEMPLATES.contains(&name.as_str()) || name.starts_with("disambiguation") {
            markers.insert("disambiguation".to_string());
        }
    }
    if lower.contains("[[category:disambiguation pages") {
        markers.insert("disambiguation".to_string());
    }
    markers
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<DumpPage>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev.into_owned(),
                Err(e) => {
                    self.done = true;
                    return Some(Err(self.xml_err(e)));
                }
            };
            let result = match event {
                Event::Start(e) => self.on_start(&e, false).map(|_| None),
                Event::Empty(e) => self.on_start(&e, true).map(|_| None),
                Event::End(_) => self.on_end(),
                Event::Text(t) => match t.unescape() {
                    Ok(s) => {
                        self.text.push_str(&s);
                        Ok(None)
                    }
                    Err(e) => Err(self.xml_err(e)),
                },
                Event::CData(c) => {
                    self.text.push_str(&String::from_utf8_lossy(&c));
                    Ok(None)
                }
                Event::Eof => {
                    self.done = true;
                    return None;
                }
                _ => Ok(None),
            };
            match result {
                Ok(Some(page)) => return Some(Ok(page)),
                Ok(None) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}
