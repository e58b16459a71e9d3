#![forbid(unsafe_code)]
//! Taboo lexicon induction and article analytics.
//!
//! The crate turns a machine-readable dictionary dump into a lexicon of n-grams
//! that predict the "euphemistic" usage tag, uses that lexicon to split
//! encyclopedia articles into a taboo sample and a matched comparison sample,
//! and computes the article- and contributor-level measures that the
//! hypothesis tests in [`stats`] consume.
//!
//! Stages, in dependency order:
//!
//! - [`dictionary`]: wiktextract JSONL parsing, sense filtration, text normalization
//! - [`lexicon`]: n-gram vocabulary, TF-IDF, ridge regression (conjugate gradient), ranking
//! - [`matcher`]: title normalization, exact matching, redirects, sampling
//! - [`revisions`]: history parsing, bot filtering, identity reverts, experience, protection
//! - [`enrichment`]: cached scoring/metadata clients and pageview ranks
//! - [`stats`]: Mann-Whitney U, chi-squared, Spearman, OLS, logistic IRLS
//! - [`pipeline`]: config-driven orchestration with resumable stages and report output

pub mod dictionary;
pub mod enrichment;
pub mod error;
pub mod lexicon;
pub mod matcher;
pub mod month;
pub mod pipeline;
pub mod revisions;
pub mod stats;
pub mod tsv;

pub use error::{Error, Result};
