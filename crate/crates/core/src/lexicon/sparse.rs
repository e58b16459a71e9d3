use rayon::prelude::*;

use super::vocab::{for_each_ngram, FeatureVocabulary};
use crate::dictionary::NormalizedDocument;
use crate::{Error, Result};

/// Compressed sparse row matrix.
///
/// Column indices within a row are strictly increasing; explicit zeros are
/// never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from per-row `(column, value)` lists.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut prev: Option<usize> = None;
            for (c, v) in row {
                if c >= n_cols {
                    return Err(Error::Argument(format!("row {r}: column {c} >= {n_cols}")));
                }
                if prev == Some(c) {
                    return Err(Error::Argument(format!("row {r}: duplicate column {c}")));
                }
                prev = Some(c);
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            n_rows: indptr.len() - 1,
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let sparse = rows
            .iter()
            .map(|r| {
                if r.len() != n_cols {
                    return Err(Error::Argument("ragged dense input".into()));
                }
                Ok(r.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        CsrMatrix::from_rows(n_cols, sparse)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Stored value at `(r, c)`, zero when absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        self.row(r).map(|(c, v)| v * x[c]).sum()
    }

    /// `y = A x`. Each output element is a sequential row sum, so the
    /// parallel and serial paths give bit-identical results.
    pub fn matvec(&self, x: &[f64], parallel: bool) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        if parallel {
            (0..self.n_rows).into_par_iter().map(|r| self.row_dot(r, x)).collect()
        } else {
            (0..self.n_rows).map(|r| self.row_dot(r, x)).collect()
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            indptr,
            indices,
            values,
        }
    }

    pub fn row_norm(&self, r: usize) -> f64 {
        self.row(r).map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

/// TF-IDF document-term matrix: raw counts times smoothed IDF, rows
/// L2-normalized. Features outside `vocab` are ignored.
pub fn vectorize_tfidf(docs: &[NormalizedDocument], vocab: &FeatureVocabulary) -> CsrMatrix {
    let rows: Vec<Vec<(usize, f64)>> = docs
        .par_iter()
        .map(|doc| {
            let mut counts: std::collections::BTreeMap<usize, f64> = Default::default();
            for_each_ngram(&doc.tokens, vocab.range(), |g| {
                if let Some(idx) = vocab.index_of(&g) {
                    *counts.entry(idx).or_insert(0.0) += 1.0;
                }
            });
            let mut row: Vec<(usize, f64)> = counts
                .into_iter()
                .map(|(idx, tf)| (idx, tf * vocab.idf(idx)))
                .collect();
            let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, w) in &mut row {
                    *w /= norm;
                }
            }
            row
        })
        .collect();
    CsrMatrix::from_rows(vocab.len(), rows).expect("vocabulary indices are in range")
}

#[cfg(test)]
mod tests {
    use super::super::vocab::{build_vocabulary, NgramRange};
    use super::*;

    fn doc(tokens: &[&str]) -> NormalizedDocument {
        NormalizedDocument {
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            label: false,
        }
    }

    #[test]
    fn single_cell_is_unit() {
        let docs = vec![doc(&["a"])];
        let v = build_vocabulary(&docs, NgramRange::default(), 1);
        let x = vectorize_tfidf(&docs, &v);
        assert_eq!(x.get(0, 0), 1.0);
    }

    #[test]
    fn two_document_weights() {
        // idf(a) = ln(3/3)+1 = 1, idf(b) = ln(3/2)+1; d1 = (1, idf_b)/norm
        let docs = vec![doc(&["a", "b"]), doc(&["a"])];
        let v = build_vocabulary(&docs, NgramRange::new(1, 1).unwrap(), 1);
        assert!((v.idf(v.index_of("a").unwrap()) - 1.0).abs() < 1e-15);
        let idf_b = 1.5f64.ln() + 1.0;
        assert!((v.idf(v.index_of("b").unwrap()) - idf_b).abs() < 1e-15);
        let x = vectorize_tfidf(&docs, &v);
        let norm = (1.0 + idf_b * idf_b).sqrt();
        assert!((x.get(0, 0) - 1.0 / norm).abs() < 1e-12);
        assert!((x.get(0, 1) - idf_b / norm).abs() < 1e-12);
        assert!((x.get(0, 0) - 0.580).abs() < 1e-3);
        assert!((x.get(0, 1) - 0.815).abs() < 1e-3);
        // absent feature: no stored entry
        assert_eq!(x.row(1).count(), 1);
        assert_eq!(x.get(1, 1), 0.0);
    }

    #[test]
    fn transpose_matches_dense() {
        let dense = vec![vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 0.0]];
        let m = CsrMatrix::from_dense(&dense).unwrap();
        let t = m.transpose();
        assert_eq!(t.n_rows(), 3);
        for r in 0..2 {
            for c in 0..3 {
                assert_eq!(m.get(r, c), t.get(c, r));
            }
        }
    }

    #[test]
    fn parallel_matvec_is_bit_identical() {
        let dense: Vec<Vec<f64>> = (0..40)
            .map(|r| (0..7).map(|c| ((r * 7 + c) as f64 * 0.37).sin()).collect())
            .collect();
        let m = CsrMatrix::from_dense(&dense).unwrap();
        let x: Vec<f64> = (0..7).map(|i| i as f64 - 2.5).collect();
        assert_eq!(m.matvec(&x, true), m.matvec(&x, false));
    }

    #[test]
    fn rejects_out_of_range_columns() {
        assert!(CsrMatrix::from_rows(2, vec![vec![(2, 1.0)]]).is_err());
    }
}
