//! Induce the taboo lexicon from the bundled dictionary sample.

use std::path::Path;

use tabooscope::dictionary::{filter_senses, parse_dictionary_file, to_documents, FilterConfig, StopwordConfig};
use tabooscope::lexicon::{induce_lexicon, InductionParams};

fn main() -> tabooscope::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/dictionary.jsonl");
    let (senses, _) = parse_dictionary_file(&path)?;
    let docs = to_documents(&filter_senses(senses, &FilterConfig::default()), &StopwordConfig::english());
    let params = InductionParams {
        top_k: 15,
        ..InductionParams::default()
    };
    let induction = induce_lexicon(&docs, &params)?;
    println!(
        "{} documents, {} features, {} CG iterations",
        induction.n_docs, induction.n_features, induction.iterations
    );
    for e in &induction.lexicon.entries {
        println!("{:>3}  {:<24} {:.4}", e.rank, e.ngram, e.coefficient);
    }
    Ok(())
}
