//! Pipeline configuration: a TOML file with `[inputs]`, `[parameters]` and
//! `[output]` tables. Relative paths resolve against the config file's
//! directory.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;

use crate::enrichment::{Mode, DEFAULT_SCOPE};
use crate::lexicon::NgramRange;
use crate::month::{format_instant, parse_instant};
use crate::stats::MwuMethod;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    inputs: Option<RawInputs>,
    parameters: Option<RawParameters>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    dictionary: Option<PathBuf>,
    stopwords: Option<Vec<PathBuf>>,
    dump: Option<PathBuf>,
    pages: Option<PathBuf>,
    bot_lists: Option<Vec<PathBuf>>,
    protection_log: Option<PathBuf>,
    pageviews: Option<PathBuf>,
    quality_cache: Option<PathBuf>,
    damaging_cache: Option<PathBuf>,
    users_cache: Option<PathBuf>,
    categories_cache: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParameters {
    top_k: Option<usize>,
    lambda: Option<f64>,
    ngram_range: Option<String>,
    min_df: Option<usize>,
    window: Option<usize>,
    comparison_size: Option<usize>,
    seed: Option<u64>,
    cutoff: Option<String>,
    horizon: Option<String>,
    damaging_threshold: Option<f64>,
    mode: Option<String>,
    scope_marker: Option<String>,
    mwu_method: Option<String>,
    mwu_continuity: Option<bool>,
    yates: Option<bool>,
    parallelism: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    secrets: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub dictionary: PathBuf,
    /// Empty means the built-in English list.
    pub stopwords: Vec<PathBuf>,
    /// MediaWiki XML export, or a revision fixture TSV (then `pages` is required).
    pub dump: PathBuf,
    pub pages: Option<PathBuf>,
    pub bot_lists: Vec<PathBuf>,
    pub protection_log: PathBuf,
    pub pageviews: PathBuf,
    pub quality_cache: PathBuf,
    pub damaging_cache: PathBuf,
    pub users_cache: PathBuf,
    pub categories_cache: PathBuf,
}

impl Inputs {
    pub fn dump_is_fixture(&self) -> bool {
        self.dump.extension().is_some_and(|e| e == "tsv")
    }
}

#[derive(Debug, Clone)]
pub struct Parameters {
    pub top_k: usize,
    pub lambda: f64,
    pub ngram_range: NgramRange,
    pub min_df: usize,
    pub window: usize,
    pub comparison_size: usize,
    pub seed: u64,
    pub cutoff: DateTime<Utc>,
    pub horizon: DateTime<Utc>,
    pub damaging_threshold: f64,
    pub mode: Mode,
    pub scope_marker: String,
    pub mwu_method: MwuMethod,
    pub mwu_continuity: bool,
    pub yates: bool,
    pub parallelism: usize,
}

#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    /// Salt and identity map; never part of the report bundle.
    pub secrets: PathBuf,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub inputs: Inputs,
    pub parameters: Parameters,
    pub output: Output,
}

pub fn mwu_method_name(m: MwuMethod) -> &'static str {
    match m {
        MwuMethod::Auto => "auto",
        MwuMethod::Exact => "exact",
        MwuMethod::Asymptotic => "asymptotic",
    }
}

pub fn parse_mwu_method(s: &str) -> Option<MwuMethod> {
    match s {
        "auto" => Some(MwuMethod::Auto),
        "exact" => Some(MwuMethod::Exact),
        "asymptotic" => Some(MwuMethod::Asymptotic),
        _ => None,
    }
}

impl Parameters {
    /// Every parameter as `(name, value)`, in a fixed order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        vec![
            ("top_k", self.top_k.to_string()),
            ("lambda", format!("{:?}", self.lambda)),
            ("ngram_range", self.ngram_range.to_string()),
            ("min_df", self.min_df.to_string()),
            ("window", self.window.to_string()),
            ("comparison_size", self.comparison_size.to_string()),
            ("seed", self.seed.to_string()),
            ("cutoff", format_instant(&self.cutoff)),
            ("horizon", format_instant(&self.horizon)),
            ("damaging_threshold", format!("{:?}", self.damaging_threshold)),
            ("mode", self.mode.as_str().to_string()),
            ("scope_marker", self.scope_marker.clone()),
            ("mwu_method", mwu_method_name(self.mwu_method).to_string()),
            ("mwu_continuity", self.mwu_continuity.to_string()),
            ("yates", self.yates.to_string()),
            ("parallelism", self.parallelism.to_string()),
        ]
    }
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Reads and validates a config file. On failure returns every problem found.
pub fn load_config(path: &Path, mode_override: Option<Mode>) -> Result<PipelineConfig, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base, mode_override)
}

pub fn parse_config(text: &str, base: &Path, mode_override: Option<Mode>) -> Result<PipelineConfig, Vec<String>> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| vec![format!("config syntax: {e}")])?;
    let mut problems = Vec::new();
    let inputs = raw.inputs.unwrap_or_default();
    let params = raw.parameters.unwrap_or_default();
    let output = raw.output.unwrap_or_default();

    let mut required = |name: &str, value: Option<PathBuf>| -> PathBuf {
        match value {
            Some(p) => resolve(base, p),
            None => {
                problems.push(format!("inputs.{name}: missing"));
                PathBuf::new()
            }
        }
    };
    let dictionary = required("dictionary", inputs.dictionary);
    let dump = required("dump", inputs.dump);
    let protection_log = required("protection_log", inputs.protection_log);
    let pageviews = required("pageviews", inputs.pageviews);
    let quality_cache = required("quality_cache", inputs.quality_cache);
    let damaging_cache = required("damaging_cache", inputs.damaging_cache);
    let users_cache = required("users_cache", inputs.users_cache);
    let categories_cache = required("categories_cache", inputs.categories_cache);
    let bot_lists: Vec<PathBuf> = match inputs.bot_lists {
        Some(v) if !v.is_empty() => v.into_iter().map(|p| resolve(base, p)).collect(),
        _ => {
            problems.push("inputs.bot_lists: missing".into());
            Vec::new()
        }
    };
    let stopwords: Vec<PathBuf> = inputs
        .stopwords
        .unwrap_or_default()
        .into_iter()
        .map(|p| resolve(base, p))
        .collect();
    let pages = inputs.pages.map(|p| resolve(base, p));

    let seed = params.seed.unwrap_or_else(|| {
        problems.push("parameters.seed: missing".into());
        0
    });
    let horizon = match params.horizon.as_deref().map(parse_instant) {
        Some(Ok(t)) => t,
        Some(Err(e)) => {
            problems.push(format!("parameters.horizon: {e}"));
            DateTime::<Utc>::MIN_UTC
        }
        None => {
            problems.push("parameters.horizon: missing".into());
            DateTime::<Utc>::MIN_UTC
        }
    };
    let cutoff = match parse_instant(params.cutoff.as_deref().unwrap_or("2008-01-01")) {
        Ok(t) => t,
        Err(e) => {
            problems.push(format!("parameters.cutoff: {e}"));
            DateTime::<Utc>::MIN_UTC
        }
    };
    let ngram_range = match NgramRange::parse(params.ngram_range.as_deref().unwrap_or("1:3")) {
        Ok(r) => r,
        Err(e) => {
            problems.push(format!("parameters.ngram_range: {e}"));
            NgramRange::default()
        }
    };
    let mode = match mode_override {
        Some(m) => m,
        None => match Mode::parse(params.mode.as_deref().unwrap_or("fixture")) {
            Ok(m) => m,
            Err(e) => {
                problems.push(format!("parameters.mode: {e}"));
                Mode::Fixture
            }
        },
    };
    let mwu_method = match parse_mwu_method(params.mwu_method.as_deref().unwrap_or("auto")) {
        Some(m) => m,
        None => {
            problems.push("parameters.mwu_method: expected auto, exact or asymptotic".into());
            MwuMethod::Auto
        }
    };
    let lambda = params.lambda.unwrap_or(1.0);
    if lambda.is_nan() || lambda < 0.0 {
        problems.push("parameters.lambda: must be non-negative".into());
    }
    let top_k = params.top_k.unwrap_or(500);
    if top_k == 0 {
        problems.push("parameters.top_k: must be positive".into());
    }
    let damaging_threshold = params.damaging_threshold.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&damaging_threshold) {
        problems.push("parameters.damaging_threshold: must lie in [0, 1]".into());
    }
    let dir = match output.dir {
        Some(d) => resolve(base, d),
        None => {
            problems.push("output.dir: missing".into());
            PathBuf::new()
        }
    };
    let secrets = match output.secrets {
        Some(s) => resolve(base, s),
        None => {
            let mut name = dir.file_name().map(|n| n.to_os_string()).unwrap_or_default();
            name.push(".secrets");
            dir.with_file_name(name)
        }
    };

    let config = PipelineConfig {
        inputs: Inputs {
            dictionary,
            stopwords,
            dump,
            pages,
            bot_lists,
            protection_log,
            pageviews,
            quality_cache,
            damaging_cache,
            users_cache,
            categories_cache,
        },
        parameters: Parameters {
            top_k,
            lambda,
            ngram_range,
            min_df: params.min_df.unwrap_or(2),
            window: params.window.unwrap_or(crate::revisions::DEFAULT_REVERT_WINDOW),
            comparison_size: params.comparison_size.unwrap_or(3255),
            seed,
            cutoff,
            horizon,
            damaging_threshold,
            mode,
            scope_marker: params.scope_marker.unwrap_or_else(|| DEFAULT_SCOPE.to_string()),
            mwu_method,
            mwu_continuity: params.mwu_continuity.unwrap_or(true),
            yates: params.yates.unwrap_or(true),
            parallelism: params.parallelism.unwrap_or(4).max(1),
        },
        output: Output { dir, secrets },
    };
    if problems.is_empty() {
        check_paths(&config, &mut problems);
    }
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(problems)
    }
}

fn check_paths(config: &PipelineConfig, problems: &mut Vec<String>) {
    let i = &config.inputs;
    let mut must_exist = vec![
        ("inputs.dictionary", &i.dictionary),
        ("inputs.dump", &i.dump),
        ("inputs.protection_log", &i.protection_log),
        ("inputs.pageviews", &i.pageviews),
    ];
    for p in &i.bot_lists {
        must_exist.push(("inputs.bot_lists", p));
    }
    for p in &i.stopwords {
        must_exist.push(("inputs.stopwords", p));
    }
    if config.parameters.mode == Mode::Fixture {
        must_exist.push(("inputs.quality_cache", &i.quality_cache));
        must_exist.push(("inputs.damaging_cache", &i.damaging_cache));
        must_exist.push(("inputs.users_cache", &i.users_cache));
        must_exist.push(("inputs.categories_cache", &i.categories_cache));
    }
    if i.dump_is_fixture() {
        match &i.pages {
            Some(p) => must_exist.push(("inputs.pages", p)),
            None => problems.push("inputs.pages: required when inputs.dump is a revision TSV".into()),
        }
    }
    for (name, path) in must_exist {
        if !path.is_file() {
            problems.push(format!("{name}: file not found: {}", path.display()));
        }
    }
    if config.parameters.horizon <= config.parameters.cutoff {
        problems.push("parameters.horizon: must be after parameters.cutoff".into());
    }
}
