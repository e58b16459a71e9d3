//! Config-driven orchestration of the six stages.
//!
//! Layout under `output.dir`:
//!
//! ```text
//! stages/<stage>/...   intermediate tables, one directory per stage
//! stamps/<stage>       content hash of everything the stage consumed
//! report/...           the report bundle
//! ```
//!
//! A stage is skipped when its stamp matches the freshly computed one. The
//! stamp covers the stage parameters, the bytes of its input files and the
//! stamps of the stages it reads from, so any upstream change cascades.

pub mod config;
pub mod redact;
pub mod report;
pub mod stages;
pub mod tables;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::enrichment::{self, ApiEndpoint, ClientOptions, Mode, ScoringEndpoint};
use crate::lexicon::InductionParams;
use crate::month::format_instant;
use crate::{Error, Result};
use config::PipelineConfig;
use redact::Redactor;

pub const STAGES: [&str; 6] = ["ingest", "induce", "match", "analyze", "enrich", "test"];

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) => 1,
            PipelineError::Stage { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Reused,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub stages: Vec<(&'static str, StageStatus)>,
    pub report_dir: PathBuf,
}

/// sha256 of a file's bytes, hex encoded.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn digest_or_absent(path: &Path) -> Result<String> {
    if path.is_file() {
        file_digest(path)
    } else {
        Ok("absent".into())
    }
}

pub fn run_from_file(path: &Path, mode: Option<Mode>) -> std::result::Result<RunSummary, PipelineError> {
    let config = config::load_config(path, mode).map_err(PipelineError::Validation)?;
    run_pipeline(&config)
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    stamps: BTreeMap<&'static str, String>,
    summary: Vec<(&'static str, StageStatus)>,
}

impl Runner<'_> {
    fn out(&self) -> &Path {
        &self.config.output.dir
    }

    fn stage_dir(&self, stage: &str) -> PathBuf {
        if stage == "test" {
            self.out().join("report")
        } else {
            self.out().join("stages").join(stage)
        }
    }

    /// Runs `body` unless the stage's stamp is current.
    fn stage(
        &mut self,
        stage: &'static str,
        upstream: &[&'static str],
        inputs: &[(&str, String)],
        params: &[(&str, String)],
        body: impl FnOnce(&Path) -> Result<()>,
    ) -> std::result::Result<(), PipelineError> {
        let mut h = Sha256::new();
        h.update(format!("stage={stage}\n"));
        for u in upstream {
            h.update(format!("upstream {u}={}\n", self.stamps[u]));
        }
        for (k, v) in inputs {
            h.update(format!("input {k}={v}\n"));
        }
        for (k, v) in params {
            h.update(format!("param {k}={v}\n"));
        }
        let stamp = hex::encode(h.finalize());
        let stamp_path = self.out().join("stamps").join(stage);
        let dir = self.stage_dir(stage);
        let current = std::fs::read_to_string(&stamp_path).ok();
        if current.as_deref() == Some(stamp.as_str()) && dir.is_dir() {
            log::info!("stage {stage}: up to date");
            self.stamps.insert(stage, stamp);
            self.summary.push((stage, StageStatus::Reused));
            return Ok(());
        }
        let fail = |source: Error| PipelineError::Stage { stage, source };
        if stamp_path.exists() {
            std::fs::remove_file(&stamp_path).map_err(|e| fail(Error::io(&stamp_path, e)))?;
        }
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| fail(Error::io(&dir, e)))?;
        }
        std::fs::create_dir_all(&dir).map_err(|e| fail(Error::io(&dir, e)))?;
        log::info!("stage {stage}: running");
        body(&dir).map_err(fail)?;
        let parent = stamp_path.parent().expect("stamp path has a parent");
        std::fs::create_dir_all(parent).map_err(|e| fail(Error::io(parent, e)))?;
        std::fs::write(&stamp_path, &stamp).map_err(|e| fail(Error::io(&stamp_path, e)))?;
        self.stamps.insert(stage, stamp);
        self.summary.push((stage, StageStatus::Ran));
        Ok(())
    }
}

fn relative_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            relative_files(root, &p, out)?;
        } else if let Ok(rel) = p.strip_prefix(root) {
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

/// Runs (or resumes) every stage and writes the report bundle.
pub fn run_pipeline(config: &PipelineConfig) -> std::result::Result<RunSummary, PipelineError> {
    let inputs = &config.inputs;
    let p = &config.parameters;
    let validation = |e: Error| PipelineError::Validation(vec![e.to_string()]);

    // Input digests, in a fixed order; also cited in the report.
    let mut cited: Vec<(String, PathBuf)> = vec![("dictionary".into(), inputs.dictionary.clone())];
    for s in &inputs.stopwords {
        cited.push(("stopwords".into(), s.clone()));
    }
    cited.push(("dump".into(), inputs.dump.clone()));
    if let Some(pages) = &inputs.pages {
        cited.push(("pages".into(), pages.clone()));
    }
    for b in &inputs.bot_lists {
        cited.push(("bot_lists".into(), b.clone()));
    }
    cited.push(("protection_log".into(), inputs.protection_log.clone()));
    cited.push(("pageviews".into(), inputs.pageviews.clone()));
    cited.push(("quality_cache".into(), inputs.quality_cache.clone()));
    cited.push(("damaging_cache".into(), inputs.damaging_cache.clone()));
    cited.push(("users_cache".into(), inputs.users_cache.clone()));
    cited.push(("categories_cache".into(), inputs.categories_cache.clone()));
    let mut digests: Vec<report::InputDigest> = Vec::new();
    let mut by_path: BTreeMap<PathBuf, String> = BTreeMap::new();
    for (label, path) in &cited {
        let d = digest_or_absent(path).map_err(validation)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        digests.push((label.clone(), name, d.clone()));
        by_path.insert(path.clone(), d);
    }
    let digest = |path: &Path| by_path.get(path).cloned().unwrap_or_else(|| "absent".into());

    let out = config.output.dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| validation(Error::io(&out, e)))?;
    let mut runner = Runner {
        config,
        stamps: BTreeMap::new(),
        summary: Vec::new(),
    };
    let stopwords = stages::load_stopwords(&inputs.stopwords).map_err(validation)?;

    // ingest
    let mut ingest_inputs = vec![("dictionary", digest(&inputs.dictionary))];
    for s in &inputs.stopwords {
        ingest_inputs.push(("stopwords", digest(s)));
    }
    runner.stage("ingest", &[], &ingest_inputs, &[], |dir| {
        stages::ingest(&inputs.dictionary, &stopwords, dir)
    })?;
    let docs = runner.stage_dir("ingest").join("documents.tsv");

    // induce
    let induction = InductionParams {
        ngrams: p.ngram_range,
        min_df: p.min_df,
        lambda: p.lambda,
        top_k: p.top_k,
        ..InductionParams::default()
    };
    let induce_params = [
        ("top_k", p.top_k.to_string()),
        ("lambda", format!("{:?}", p.lambda)),
        ("ngram_range", p.ngram_range.to_string()),
        ("min_df", p.min_df.to_string()),
    ];
    runner.stage("induce", &["ingest"], &[], &induce_params, |dir| {
        stages::induce(&docs, &induction, dir)
    })?;
    let lexicon = runner.stage_dir("induce").join("lexicon.tsv");

    // match
    let pages_path = inputs.pages.clone().unwrap_or_else(|| inputs.dump.clone());
    let match_params = [
        ("comparison_size", p.comparison_size.to_string()),
        ("seed", p.seed.to_string()),
        ("ngram_range", p.ngram_range.to_string()),
    ];
    runner.stage(
        "match",
        &["ingest", "induce"],
        &[("pages", digest(&pages_path))],
        &match_params,
        |dir| {
            let args = stages::MatchArgs {
                lexicon: &lexicon,
                documents: &docs,
                pages: &pages_path,
                ngram_range: p.ngram_range,
                comparison_size: p.comparison_size,
                seed: p.seed,
                stopwords: &stopwords,
            };
            stages::match_articles(&args, dir)
        },
    )?;
    let manifest = runner.stage_dir("match").join("manifest.tsv");

    // analyze
    let mut redactor = Redactor::open(&config.output.secrets).map_err(validation)?;
    redactor.save().map_err(validation)?;
    let mut analyze_inputs = vec![
        ("dump", digest(&inputs.dump)),
        ("protection_log", digest(&inputs.protection_log)),
        (
            "salt",
            digest_or_absent(&config.output.secrets.join("salt")).map_err(validation)?,
        ),
    ];
    for b in &inputs.bot_lists {
        analyze_inputs.push(("bot_list", digest(b)));
    }
    let analyze_params = [
        ("window", p.window.to_string()),
        ("cutoff", format_instant(&p.cutoff)),
        ("horizon", format_instant(&p.horizon)),
    ];
    runner.stage("analyze", &["match"], &analyze_inputs, &analyze_params, |dir| {
        let args = stages::AnalyzeArgs {
            dump: &inputs.dump,
            bot_lists: &inputs.bot_lists,
            protection_log: &inputs.protection_log,
            manifest: &manifest,
            window: p.window,
            cutoff: p.cutoff,
            horizon: p.horizon,
        };
        stages::analyze(&args, &mut redactor, dir)
    })?;

    // enrich
    let enrich_inputs = [
        ("pageviews", digest(&inputs.pageviews)),
        ("quality_cache", digest(&inputs.quality_cache)),
        ("damaging_cache", digest(&inputs.damaging_cache)),
        ("users_cache", digest(&inputs.users_cache)),
        ("categories_cache", digest(&inputs.categories_cache)),
    ];
    let enrich_params = [
        ("damaging_threshold", format!("{:?}", p.damaging_threshold)),
        ("mode", p.mode.as_str().to_string()),
        ("scope_marker", p.scope_marker.clone()),
        ("horizon", format_instant(&p.horizon)),
    ];
    let analyze_dir = runner.stage_dir("analyze");
    runner.stage("enrich", &["match", "analyze"], &enrich_inputs, &enrich_params, |dir| {
        let options = ClientOptions {
            parallelism: p.parallelism,
            ..ClientOptions::default()
        };
        let open = |path: &Path| enrichment::open_client(p.mode, path, options.clone());
        let quality = open(&inputs.quality_cache)?;
        let damaging = open(&inputs.damaging_cache)?;
        let users = open(&inputs.users_cache)?;
        let categories = open(&inputs.categories_cache)?;
        let snapshot = match p.mode {
            Mode::Fixture => p.horizon,
            Mode::Live => chrono::Utc::now(),
        };
        let args = stages::EnrichArgs {
            manifest: &manifest,
            analyze_dir: &analyze_dir,
            pageviews: &inputs.pageviews,
            quality: &quality,
            damaging: &damaging,
            users: &users,
            categories: &categories,
            scoring: ScoringEndpoint::default(),
            api: ApiEndpoint::default(),
            damaging_threshold: p.damaging_threshold,
            scope_marker: &p.scope_marker,
            horizon: p.horizon,
            snapshot,
        };
        stages::enrich(&args, &redactor, dir)
    })?;

    // test
    let mut stage_files = Vec::new();
    relative_files(&out, &out.join("stages"), &mut stage_files).map_err(|source| PipelineError::Stage {
        stage: "test",
        source,
    })?;
    let echo: Vec<(&str, String)> = p.echo();
    runner.stage("test", &["induce", "match", "analyze", "enrich"], &[], &echo, |dir| {
        report::run_tests(&out, p, &digests, &stage_files, dir)
    })?;

    Ok(RunSummary {
        stages: runner.summary,
        report_dir: out.join("report"),
    })
}
