//! Lexicon induction: which n-grams of dictionary definitions predict the
//! euphemistic tag.
//!
//! Definitions are vectorized with TF-IDF over 1–3-grams, a ridge regression
//! is fitted against the 0/1 euphemism label, and the features with the most
//! positive coefficients form the [`TabooLexicon`].

mod ridge;
mod sparse;
mod vocab;

use std::path::Path;

pub use ridge::{fit_ridge, RidgeFit, RidgeOptions};
pub use sparse::{vectorize_tfidf, CsrMatrix};
pub use vocab::{build_vocabulary, for_each_ngram, ngram_population, FeatureVocabulary, NgramRange};

use crate::dictionary::NormalizedDocument;
use crate::tsv::TsvWriter;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub rank: usize,
    pub ngram: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabooLexicon {
    pub k: usize,
    pub entries: Vec<LexiconEntry>,
}

impl TabooLexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ngrams(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.ngram.as_str())
    }

    pub fn rank_of(&self, ngram: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.ngram == ngram).map(|e| e.rank)
    }

    /// Writes `rank<TAB>ngram<TAB>coefficient`, coefficients in shortest
    /// round-trip decimal form.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = TsvWriter::create(path, &["rank", "ngram", "coefficient"])?;
        for e in &self.entries {
            w.row(&[e.rank.to_string(), e.ngram.clone(), format!("{:?}", e.coefficient)])?;
        }
        w.finish()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (header, rows) = crate::tsv::read(path)?;
        let cols = crate::tsv::columns(&header, &["rank", "ngram", "coefficient"], path)?;
        let bad = |line: usize, what: &str| {
            Error::parse(format!("{}:{}", path.display(), line), format!("bad {what}"))
        };
        let mut entries = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let field = |c: usize| row.get(c).map(String::as_str).unwrap_or("");
            entries.push(LexiconEntry {
                rank: field(cols[0]).parse().map_err(|_| bad(i + 2, "rank"))?,
                ngram: field(cols[1]).to_string(),
                coefficient: field(cols[2]).parse().map_err(|_| bad(i + 2, "coefficient"))?,
            });
        }
        Ok(TabooLexicon {
            k: entries.len(),
            entries,
        })
    }
}

/// Top-`k` features by descending coefficient, ties broken by n-gram.
///
/// Negative coefficients never enter the lexicon, so it can be shorter than
/// `k` when fewer features have non-negative weight.
pub fn rank_terms(weights: &[f64], vocab: &FeatureVocabulary, k: usize) -> Result<TabooLexicon> {
    if k == 0 {
        return Err(Error::Argument("top-k must be positive".into()));
    }
    if weights.len() != vocab.len() {
        return Err(Error::Argument(format!(
            "{} weights for {} features",
            weights.len(),
            vocab.len()
        )));
    }
    let mut candidates: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, w)| *w >= 0.0)
        .collect();
    candidates.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| vocab.feature(a.0).cmp(vocab.feature(b.0)))
    });
    let entries = candidates
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (idx, coefficient))| LexiconEntry {
            rank: i + 1,
            ngram: vocab.feature(idx).to_string(),
            // normalizes -0.0
            coefficient: coefficient + 0.0,
        })
        .collect();
    Ok(TabooLexicon { k, entries })
}

#[derive(Debug, Clone)]
pub struct InductionParams {
    pub ngrams: NgramRange,
    pub min_df: usize,
    pub lambda: f64,
    pub top_k: usize,
    pub ridge: RidgeOptions,
}

impl Default for InductionParams {
    fn default() -> Self {
        InductionParams {
            ngrams: NgramRange::default(),
            min_df: 2,
            lambda: 1.0,
            top_k: 500,
            ridge: RidgeOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Induction {
    pub lexicon: TabooLexicon,
    pub n_docs: usize,
    pub n_features: usize,
    pub nnz: usize,
    pub iterations: usize,
}

/// Vocabulary, TF-IDF, ridge fit and ranking in one call.
pub fn induce_lexicon(docs: &[NormalizedDocument], params: &InductionParams) -> Result<Induction> {
    let vocab = build_vocabulary(docs, params.ngrams, params.min_df);
    let x = vectorize_tfidf(docs, &vocab);
    let y: Vec<f64> = docs.iter().map(|d| if d.label { 1.0 } else { 0.0 }).collect();
    let fit = fit_ridge(&x, &y, params.lambda, &params.ridge)?;
    let lexicon = rank_terms(&fit.weights, &vocab, params.top_k)?;
    log::info!(
        "lexicon: {} docs, {} features, {} nonzeros, CG iterations {}",
        docs.len(),
        vocab.len(),
        x.nnz(),
        fit.iterations
    );
    Ok(Induction {
        lexicon,
        n_docs: docs.len(),
        n_features: vocab.len(),
        nnz: x.nnz(),
        iterations: fit.iterations,
    })
}
