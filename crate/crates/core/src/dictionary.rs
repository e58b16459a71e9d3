//! Dictionary ingestion: wiktextract JSONL records to labeled token documents.
//!
//! Each input line is one wiktextract entry (`word`, `lang`/`lang_code`,
//! `senses[].glosses[]`, `senses[].tags[]`). Every (word, gloss) pair becomes a
//! [`DictionarySense`]. Senses are then filtered (redirect-style glosses,
//! non-English entries, duplicates) and normalized into [`NormalizedDocument`]s.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::tsv::TsvWriter;
use crate::{Error, Result};

const EUPHEMISTIC_TAG: &str = "euphemistic";

static STANDARD_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
static EXTRA_STOPWORDS: &str = include_str!("../data/stopwords_extra.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionarySense {
    pub headword: String,
    pub definition: String,
    pub tags: BTreeSet<String>,
    pub language: String,
    pub euphemistic: bool,
}

impl DictionarySense {
    pub fn new(
        headword: impl Into<String>,
        definition: impl Into<String>,
        tags: impl IntoIterator<Item = impl Into<String>>,
        language: impl Into<String>,
    ) -> Self {
        let tags: BTreeSet<String> = tags.into_iter().map(Into::into).collect();
        let euphemistic = has_euphemistic_tag(&tags);
        DictionarySense {
            headword: headword.into(),
            definition: definition.into(),
            tags,
            language: language.into(),
            euphemistic,
        }
    }
}

fn has_euphemistic_tag(tags: &BTreeSet<String>) -> bool {
    tags.iter().any(|t| t.trim().eq_ignore_ascii_case(EUPHEMISTIC_TAG))
}

/// A malformed input line. Never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

#[derive(Deserialize)]
struct RawEntry {
    word: String,
    #[serde(default)]
    lang: Option<String>,
    #[serde(default)]
    lang_code: Option<String>,
    #[serde(default)]
    senses: Vec<RawSense>,
}

#[derive(Deserialize)]
struct RawSense {
    #[serde(default)]
    glosses: Vec<String>,
    #[serde(default)]
    tags: Vec<String>,
}

fn parse_line(line: &str) -> std::result::Result<Vec<DictionarySense>, String> {
    let entry: RawEntry = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let language = entry
        .lang_code
        .or(entry.lang)
        .unwrap_or_default()
        .trim()
        .to_string();
    let mut senses = Vec::new();
    for sense in entry.senses {
        for gloss in sense.glosses {
            senses.push(DictionarySense::new(
                entry.word.clone(),
                gloss.trim(),
                sense.tags.iter().cloned(),
                language.clone(),
            ));
        }
    }
    Ok(senses)
}

/// Parses a wiktextract JSONL stream.
///
/// Lines are parsed in parallel; output order follows input line order.
/// Blank lines are skipped. Malformed lines land in the error log.
pub fn parse_dictionary_stream<R: BufRead>(
    reader: R,
) -> std::io::Result<(Vec<DictionarySense>, Vec<ParseError>)> {
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let parsed: Vec<(usize, std::result::Result<Vec<DictionarySense>, String>)> = lines
        .par_iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, parse_line(l)))
        .collect();

    let mut senses = Vec::new();
    let mut errors = Vec::new();
    for (line, result) in parsed {
        match result {
            Ok(s) => senses.extend(s),
            Err(message) => errors.push(ParseError { line, message }),
        }
    }
    Ok((senses, errors))
}

pub fn parse_dictionary_file(path: &Path) -> Result<(Vec<DictionarySense>, Vec<ParseError>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dictionary_stream(std::io::BufReader::new(file)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    /// Glosses starting with any of these (case-insensitive) are dropped.
    pub redirect_prefixes: Vec<String>,
    /// Accepted language codes or names, compared case-insensitively.
    pub languages: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            redirect_prefixes: [
                "synonym of",
                "initialism of",
                "abbreviation of",
                "alternative form of",
                "alternative spelling of",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            languages: vec!["en".into(), "english".into()],
        }
    }
}

impl FilterConfig {
    fn is_redirect_gloss(&self, gloss: &str) -> bool {
        let g = gloss.trim_start().to_lowercase();
        self.redirect_prefixes.iter().any(|p| g.starts_with(p.as_str()))
    }

    fn accepts_language(&self, language: &str) -> bool {
        self.languages
            .iter()
            .any(|l| l.eq_ignore_ascii_case(language.trim()))
    }
}

/// Drops non-definitions and collapses duplicate (headword, definition) pairs.
///
/// Order-preserving: each surviving pair sits at the position of its first
/// occurrence. A collapsed pair carries the union of its duplicates' tags, so
/// it is euphemistic if any duplicate was.
pub fn filter_senses(senses: Vec<DictionarySense>, config: &FilterConfig) -> Vec<DictionarySense> {
    let mut out: Vec<DictionarySense> = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for sense in senses {
        if sense.definition.trim().is_empty()
            || config.is_redirect_gloss(&sense.definition)
            || !config.accepts_language(&sense.language)
        {
            continue;
        }
        let key = (sense.headword.clone(), sense.definition.clone());
        match seen.get(&key) {
            Some(&idx) => {
                let kept = &mut out[idx];
                kept.tags.extend(sense.tags);
                kept.euphemistic = has_euphemistic_tag(&kept.tags);
            }
            None => {
                seen.insert(key, out.len());
                out.push(sense);
            }
        }
    }
    out
}

/// Stop words removed from definitions and titles.
#[derive(Debug, Clone, Default)]
pub struct StopwordConfig {
    words: HashSet<String>,
}

impl StopwordConfig {
    /// The frozen standard English list plus the dictionary filler words.
    pub fn english() -> Self {
        let mut cfg = StopwordConfig::default();
        cfg.extend_from_str(STANDARD_STOPWORDS);
        cfg.extend_from_str(EXTRA_STOPWORDS);
        cfg
    }

    /// Only the standard English list.
    pub fn standard_only() -> Self {
        let mut cfg = StopwordConfig::default();
        cfg.extend_from_str(STANDARD_STOPWORDS);
        cfg
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordConfig {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    /// Loads a word-per-line file; `#` starts a comment line.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = StopwordConfig::default();
        cfg.extend_from_str(&text);
        Ok(cfg)
    }

    fn extend_from_str(&mut self, text: &str) {
        for line in text.lines() {
            let w = line.trim();
            if w.is_empty() || w.starts_with('#') {
                continue;
            }
            self.words.insert(w.to_lowercase());
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercased maximal runs of alphabetic characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn normalize_definition(definition: &str, stopwords: &StopwordConfig) -> Vec<String> {
    tokenize(definition)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedDocument {
    pub tokens: Vec<String>,
    pub label: bool,
}

pub fn to_documents(senses: &[DictionarySense], stopwords: &StopwordConfig) -> Vec<NormalizedDocument> {
    senses
        .par_iter()
        .map(|s| NormalizedDocument {
            tokens: normalize_definition(&s.definition, stopwords),
            label: s.euphemistic,
        })
        .collect()
}

/// Writes documents as `label<TAB>tokens` with space-joined tokens.
pub fn write_documents(path: &Path, docs: &[NormalizedDocument]) -> Result<()> {
    let mut w = TsvWriter::create(path, &["label", "tokens"])?;
    for doc in docs {
        w.row(&[if doc.label { "1" } else { "0" }, &doc.tokens.join(" ")])?;
    }
    w.finish()
}

pub fn read_documents(path: &Path) -> Result<Vec<NormalizedDocument>> {
    let (header, rows) = crate::tsv::read(path)?;
    let cols = crate::tsv::columns(&header, &["label", "tokens"], path)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| {
            let label = match row.get(cols[0]).map(String::as_str) {
                Some("1") => true,
                Some("0") => false,
                other => {
                    return Err(Error::parse(
                        format!("{}:{}", path.display(), i + 2),
                        format!("bad label {other:?}"),
                    ))
                }
            };
            let tokens = row
                .get(cols[1])
                .map(|t| t.split_whitespace().map(str::to_string).collect())
                .unwrap_or_default();
            Ok(NormalizedDocument { tokens, label })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stop() -> StopwordConfig {
        StopwordConfig::english()
    }

    #[test]
    fn frozen_lists_have_expected_sizes() {
        assert_eq!(StopwordConfig::standard_only().len(), 179);
        assert_eq!(StopwordConfig::english().len(), 179 + 14);
    }

    #[test]
    fn empty_stream() {
        let (senses, errors) = parse_dictionary_stream("".as_bytes()).unwrap();
        assert!(senses.is_empty());
        assert!(errors.is_empty());
    }

    #[test]
    fn malformed_line_is_logged_not_fatal() {
        let input = r#"{"word": "corpse", "lang_code": "en", "senses": [{"glosses": ["A dead body."]}]}
{"word": "broken", "senses": [
{"word": "stiff", "lang_code": "en", "senses": [{"glosses": ["A corpse."], "tags": ["slang"]}]}
"#;
        let (senses, errors) = parse_dictionary_stream(input.as_bytes()).unwrap();
        assert_eq!(senses.len(), 2);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 2);
    }

    #[test]
    fn member_euphemistic_sense() {
        let input = r#"{"word": "member", "lang": "English", "lang_code": "en", "pos": "noun", "senses": [{"glosses": ["One who officially belongs to a group."]}, {"glosses": ["The penis."], "tags": ["Euphemistic"]}, {"glosses": ["A part of a whole."], "tags": ["logic"]}]}"#;
        let (senses, errors) = parse_dictionary_stream(input.as_bytes()).unwrap();
        assert!(errors.is_empty());
        assert_eq!(senses.len(), 3);
        assert!(!senses[0].euphemistic);
        assert!(senses[1].euphemistic);
        assert!(!senses[2].euphemistic);
    }

    #[test]
    fn synonym_gloss_dropped() {
        let s = vec![DictionarySense::new("stiff", "synonym of corpse", Vec::<String>::new(), "en")];
        assert!(filter_senses(s, &FilterConfig::default()).is_empty());
    }

    #[test]
    fn ten_sense_fixture_keeps_six() {
        let none = Vec::<String>::new;
        let senses = vec![
            DictionarySense::new("a", "A first letter.", none(), "en"),
            DictionarySense::new("b", "Synonym of bee.", none(), "en"),
            DictionarySense::new("c", "A sea.", none(), "en"),
            DictionarySense::new("d", "initialism of Doctor", none(), "en"),
            DictionarySense::new("e", "An exit.", none(), "en"),
            DictionarySense::new("f", "Fromage.", none(), "fr"),
            DictionarySense::new("g", "A gee.", none(), "en"),
            DictionarySense::new("h", "Alternative spelling of aitch", none(), "en"),
            DictionarySense::new("i", "An eye.", none(), "English"),
            DictionarySense::new("j", "A jay.", none(), "en"),
        ];
        let kept = filter_senses(senses, &FilterConfig::default());
        let words: Vec<_> = kept.iter().map(|s| s.headword.as_str()).collect();
        assert_eq!(words, ["a", "c", "e", "g", "i", "j"]);
    }

    #[test]
    fn duplicates_collapse_to_euphemistic() {
        let senses = vec![
            DictionarySense::new("pass", "To die.", Vec::<String>::new(), "en"),
            DictionarySense::new("go", "To move.", Vec::<String>::new(), "en"),
            DictionarySense::new("pass", "To die.", vec!["euphemistic"], "en"),
        ];
        let kept = filter_senses(senses, &FilterConfig::default());
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].headword, "pass");
        assert!(kept[0].euphemistic);
        assert!(kept[0].tags.contains("euphemistic"));
    }

    #[test]
    fn normalize_examples() {
        assert!(normalize_definition("", &stop()).is_empty());
        assert_eq!(
            normalize_definition("The member of a group 123", &stop()),
            ["member", "group"]
        );
        assert!(normalize_definition("a term used especially for something", &stop()).is_empty());
    }

    #[test]
    fn digits_split_tokens() {
        assert_eq!(tokenize("abc123def 4th"), ["abc", "def", "th"]);
    }

    #[test]
    fn documents_roundtrip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.tsv");
        let docs = vec![
            NormalizedDocument { tokens: vec!["dead".into(), "body".into()], label: true },
            NormalizedDocument { tokens: vec![], label: false },
        ];
        write_documents(&path, &docs).unwrap();
        assert_eq!(read_documents(&path).unwrap(), docs);
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(text in "[A-Za-z0-9 ,.'()-]{0,80}") {
            let s = stop();
            let once = normalize_definition(&text, &s);
            let twice = normalize_definition(&once.join(" "), &s);
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.iter().all(|t| !t.chars().any(|c| c.is_ascii_digit())));
        }

        #[test]
        fn filter_is_ordered_subset(flags in proptest::collection::vec((0u8..4, 0u8..3), 0..30)) {
            let senses: Vec<_> = flags.iter().enumerate().map(|(i, (kind, word))| {
                let def = match kind {
                    0 => format!("Definition {word}."),
                    1 => format!("Synonym of w{i}"),
                    2 => String::new(),
                    _ => format!("Thing {i}."),
                };
                DictionarySense::new(format!("w{word}"), def, Vec::<String>::new(), "en")
            }).collect();
            let kept = filter_senses(senses.clone(), &FilterConfig::default());
            let mut cursor = 0;
            for k in &kept {
                let pos = senses[cursor..].iter().position(|s| s.headword == k.headword && s.definition == k.definition);
                prop_assert!(pos.is_some());
                cursor += pos.unwrap() + 1;
            }
        }
    }
}
