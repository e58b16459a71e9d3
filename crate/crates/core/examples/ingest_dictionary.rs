//! Parse the bundled wiktextract sample, filter senses and normalize them.
//!
//! cargo run --example ingest_dictionary [-- path/to/dictionary.jsonl]

use std::path::PathBuf;

use tabooscope::dictionary::{filter_senses, parse_dictionary_file, to_documents, FilterConfig, StopwordConfig};

fn main() -> tabooscope::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/dictionary.jsonl"));
    let (senses, errors) = parse_dictionary_file(&path)?;
    let parsed = senses.len();
    let kept = filter_senses(senses, &FilterConfig::default());
    let docs = to_documents(&kept, &StopwordConfig::english());
    println!("{parsed} senses parsed, {} malformed lines, {} kept", errors.len(), kept.len());
    println!("{} euphemistic", docs.iter().filter(|d| d.label).count());
    for (sense, doc) in kept.iter().zip(&docs).filter(|(s, _)| s.euphemistic).take(3) {
        println!("  {}: {:?}", sense.headword, doc.tokens);
    }
    Ok(())
}
