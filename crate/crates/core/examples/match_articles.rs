//! Title normalization, redirect resolution and sampling on hand-made pages.

use std::collections::{BTreeSet, HashSet};

use tabooscope::dictionary::StopwordConfig;
use tabooscope::matcher::{build_samples, normalize_title, PageRecord};

fn page(id: u64, title: &str, redirect: Option<&str>) -> PageRecord {
    PageRecord {
        page_id: id,
        title: title.into(),
        redirect_target: redirect.map(String::from),
        markers: BTreeSet::new(),
    }
}

fn main() -> tabooscope::Result<()> {
    let sw = StopwordConfig::english();
    println!("{:?}", normalize_title("Hell to the no", &sw));

    let pages = [
        page(1, "Hell", None),
        page(2, "Being Bobby Brown", None),
        page(3, "Hell to the no", Some("Being Bobby Brown")),
        page(4, "Piss", Some("Urine#Slang")),
        page(5, "Kettle", None),
        page(6, "Lantern", None),
        page(7, "Urine", None),
    ];
    let lexicon: HashSet<String> = ["hell", "piss"].map(String::from).into();
    let population: HashSet<String> = ["kettle", "lantern", "urine"].map(String::from).into();
    let manifest = build_samples(&pages, &lexicon, &population, 2, 7, &sw)?;
    for e in &manifest.entries {
        println!("{:<10} {:<18} via {:?} ({})", e.sample.as_str(), e.title, e.matched_title, e.ngram);
    }
    for d in &manifest.dropped {
        println!("dropped    {:<18} {}", d.title, d.reason);
    }
    Ok(())
}
