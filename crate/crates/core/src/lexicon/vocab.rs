use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;

use crate::dictionary::NormalizedDocument;
use crate::{Error, Result};

/// Inclusive n-gram length range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramRange {
    pub min: usize,
    pub max: usize,
}

impl NgramRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || max < min {
            return Err(Error::Argument(format!("invalid n-gram range {min}:{max}")));
        }
        Ok(NgramRange { min, max })
    }

    /// Parses `"1:3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Argument(format!("n-gram range `{s}` is not MIN:MAX")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Argument(format!("n-gram range `{s}` is not MIN:MAX")))
        };
        NgramRange::new(parse(a)?, parse(b)?)
    }
}

impl Default for NgramRange {
    fn default() -> Self {
        NgramRange { min: 1, max: 3 }
    }
}

impl std::fmt::Display for NgramRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

/// Visits every contiguous n-gram of `tokens` (space-joined) within `range`.
pub fn for_each_ngram(tokens: &[String], range: NgramRange, mut f: impl FnMut(String)) {
    for n in range.min..=range.max {
        if n > tokens.len() {
            break;
        }
        for window in tokens.windows(n) {
            f(window.join(" "));
        }
    }
}

/// Every distinct n-gram occurring in any document.
pub fn ngram_population(docs: &[NormalizedDocument], range: NgramRange) -> HashSet<String> {
    docs.par_iter()
        .fold(HashSet::new, |mut set, doc| {
            for_each_ngram(&doc.tokens, range, |g| {
                set.insert(g);
            });
            set
        })
        .reduce(HashSet::new, |mut a, mut b| {
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
            }
            a.extend(b);
            a
        })
}

/// Feature dictionary with lexicographic, dense column indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVocabulary {
    features: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    range: NgramRange,
}

impl FeatureVocabulary {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn range(&self) -> NgramRange {
        self.range
    }

    pub fn index_of(&self, feature: &str) -> Option<usize> {
        self.index.get(feature).copied()
    }

    pub fn feature(&self, idx: usize) -> &str {
        &self.features[idx]
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn doc_freq(&self, idx: usize) -> usize {
        self.doc_freq[idx]
    }

    /// Smoothed inverse document frequency `ln((1+N)/(1+df)) + 1`.
    pub fn idf(&self, idx: usize) -> f64 {
        let n = self.n_docs as f64;
        let df = self.doc_freq[idx] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }
}

pub fn build_vocabulary(
    docs: &[NormalizedDocument],
    range: NgramRange,
    min_df: usize,
) -> FeatureVocabulary {
    let counts: HashMap<String, usize> = docs
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<String, usize>, doc| {
            let mut distinct = HashSet::new();
            for_each_ngram(&doc.tokens, range, |g| {
                distinct.insert(g);
            });
            for g in distinct {
                *acc.entry(g).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let kept: BTreeMap<String, usize> = counts
        .into_iter()
        .filter(|(_, df)| *df >= min_df.max(1))
        .collect();
    let mut features = Vec::with_capacity(kept.len());
    let mut doc_freq = Vec::with_capacity(kept.len());
    let mut index = HashMap::with_capacity(kept.len());
    for (i, (feature, df)) in kept.into_iter().enumerate() {
        index.insert(feature.clone(), i);
        features.push(feature);
        doc_freq.push(df);
    }
    FeatureVocabulary {
        features,
        index,
        doc_freq,
        n_docs: docs.len(),
        range,
    }
}
