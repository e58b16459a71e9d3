//! TF-IDF weighting and the conjugate-gradient ridge solver on a toy corpus.

use tabooscope::dictionary::NormalizedDocument;
use tabooscope::lexicon::{build_vocabulary, fit_ridge, vectorize_tfidf, NgramRange, RidgeOptions};

fn doc(text: &str, label: bool) -> NormalizedDocument {
    NormalizedDocument {
        tokens: text.split_whitespace().map(String::from).collect(),
        label,
    }
}

fn main() -> tabooscope::Result<()> {
    let docs = [
        doc("pass away peacefully", true),
        doc("pass ball teammate", false),
        doc("away game stadium", false),
        doc("pass away", true),
    ];
    let vocab = build_vocabulary(&docs, NgramRange::new(1, 2)?, 1);
    let x = vectorize_tfidf(&docs, &vocab);
    let y: Vec<f64> = docs.iter().map(|d| if d.label { 1.0 } else { 0.0 }).collect();
    let fit = fit_ridge(&x, &y, 1.0, &RidgeOptions::default())?;
    println!("{} features, CG converged in {} iterations", vocab.len(), fit.iterations);
    let mut ranked: Vec<(&str, f64)> = vocab.features().iter().map(String::as_str).zip(fit.weights).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (feature, w) in ranked {
        println!("{w:+.4}  {feature}");
    }
    Ok(())
}
