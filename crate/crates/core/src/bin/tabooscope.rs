use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand};

use tabooscope::enrichment::{self, ApiEndpoint, ClientOptions, Mode, ScoringEndpoint};
use tabooscope::lexicon::{InductionParams, NgramRange};
use tabooscope::matcher::SampleManifest;
use tabooscope::month::parse_instant;
use tabooscope::pipeline::redact::Redactor;
use tabooscope::pipeline::{self, stages, tables, PipelineError, StageStatus};
use tabooscope::Error;

#[derive(Parser)]
#[command(name = "tabooscope", version, about = "Taboo lexicon induction and article analytics")]
struct Cli {
    /// Client mode for scoring and metadata lookups; overrides the config.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage from a config file, resuming where inputs are unchanged.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parse a wiktextract dump into labeled, normalized documents.
    IngestDictionary {
        #[arg(long)]
        input: PathBuf,
        /// Stop-word file, one word per line; repeatable. Defaults to the built-in list.
        #[arg(long)]
        stopwords: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the ridge model and write the top-K lexicon.
    InduceLexicon {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long, default_value_t = 500)]
        top_k: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        min_df: usize,
        #[arg(long, default_value = "1:3", value_parser = parse_range)]
        ngrams: NgramRange,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the taboo and comparison samples.
    MatchArticles {
        #[arg(long)]
        lexicon: PathBuf,
        /// XML export, or a page table (`.tsv`).
        #[arg(long)]
        pages: PathBuf,
        /// Normalized documents; their n-grams define the comparison population.
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        stopwords: Vec<PathBuf>,
        #[arg(long, default_value_t = 3255)]
        comparison_size: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "1:3", value_parser = parse_range)]
        ngrams: NgramRange,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reverts, experience, protection and contributor flags for the samples.
    AnalyzeRevisions {
        /// XML history export, or a revision table (`.tsv`).
        #[arg(long)]
        dump: PathBuf,
        /// Bot-name list; repeatable.
        #[arg(long = "bots", required = true)]
        bots: Vec<PathBuf>,
        #[arg(long)]
        protection_log: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long, default_value = "2008-01-01", value_parser = parse_time)]
        cutoff: DateTime<Utc>,
        /// End of the observation window.
        #[arg(long, value_parser = parse_time)]
        horizon: DateTime<Utc>,
        /// Salt and identity map. Defaults to `<out>.secrets`.
        #[arg(long)]
        secrets: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Month-end article quality from the scoring service.
    ScoreQuality {
        #[arg(long)]
        cache: PathBuf,
        /// `revisions.tsv` from analyze-revisions.
        #[arg(long)]
        revisions: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_parser = parse_time)]
        horizon: DateTime<Utc>,
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Damaging probability for every revision.
    ScoreDamaging {
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        revisions: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gender and email preferences for account holders.
    FetchUsers {
        #[arg(long)]
        cache: PathBuf,
        /// `contributors.tsv` from analyze-revisions.
        #[arg(long)]
        contributors: PathBuf,
        #[arg(long)]
        secrets: PathBuf,
        /// Snapshot time recorded on each profile; defaults to now.
        #[arg(long, value_parser = parse_time)]
        snapshot: Option<DateTime<Utc>>,
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Talk-page categories and the topical-scope flag.
    FetchCategories {
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value = enrichment::DEFAULT_SCOPE)]
        scope: String,
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean within-month view rank per sampled article.
    RankViews {
        /// Monthly pageviews table.
        #[arg(long, alias = "cache")]
        pageviews: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<NgramRange, String> {
    NgramRange::parse(s).map_err(|e| e.to_string())
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, String> {
    parse_instant(s).map_err(|e| e.to_string())
}

/// Failures before any work starts exit with 1, failures during it with 2.
enum Failure {
    Validation(String),
    Stage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Stage(e)
    }
}

fn require(paths: &[&Path]) -> Result<(), Failure> {
    let missing: Vec<String> = paths
        .iter()
        .filter(|p| !p.is_file())
        .map(|p| format!("file not found: {}", p.display()))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(missing.join("\n")))
    }
}

fn out_dir(out: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(out).map_err(|e| Failure::Validation(format!("{}: {e}", out.display())))
}

fn client(mode: Option<Mode>, cache: &Path) -> Result<enrichment::Client, Failure> {
    let mode = mode.unwrap_or_default();
    if mode == Mode::Fixture {
        require(&[cache])?;
    }
    enrichment::open_client(mode, cache, ClientOptions::default()).map_err(|e| Failure::Validation(e.to_string()))
}

fn scoring(url: Option<String>) -> ScoringEndpoint {
    url.map(|url| ScoringEndpoint { url }).unwrap_or_default()
}

fn api(url: Option<String>) -> ApiEndpoint {
    url.map(|url| ApiEndpoint { url }).unwrap_or_default()
}

fn secrets_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_else(|| "out".into());
    name.push(".secrets");
    out.with_file_name(name)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mode = cli.mode;
    match cli.command {
        Command::Run { config } => match pipeline::run_from_file(&config, mode) {
            Ok(summary) => {
                for (stage, status) in summary.stages {
                    let verb = match status {
                        StageStatus::Ran => "ran",
                        StageStatus::Reused => "up to date",
                    };
                    println!("{stage:<8} {verb}");
                }
                println!("report: {}", summary.report_dir.display());
                Ok(())
            }
            Err(PipelineError::Validation(problems)) => Err(Failure::Validation(format!(
                "invalid configuration:\n  {}",
                problems.join("\n  ")
            ))),
            Err(e @ PipelineError::Stage { .. }) => {
                eprintln!("error: {e}");
                std::process::exit(e.exit_code());
            }
        },
        Command::IngestDictionary { input, stopwords, out } => {
            require(&[&input])?;
            let sw = stages::load_stopwords(&stopwords).map_err(|e| Failure::Validation(e.to_string()))?;
            out_dir(&out)?;
            Ok(stages::ingest(&input, &sw, &out)?)
        }
        Command::InduceLexicon {
            docs,
            top_k,
            lambda,
            min_df,
            ngrams,
            out,
        } => {
            require(&[&docs])?;
            out_dir(&out)?;
            let params = InductionParams {
                ngrams,
                min_df,
                lambda,
                top_k,
                ..InductionParams::default()
            };
            Ok(stages::induce(&docs, &params, &out)?)
        }
        Command::MatchArticles {
            lexicon,
            pages,
            docs,
            stopwords,
            comparison_size,
            seed,
            ngrams,
            out,
        } => {
            require(&[&lexicon, &pages, &docs])?;
            let sw = stages::load_stopwords(&stopwords).map_err(|e| Failure::Validation(e.to_string()))?;
            out_dir(&out)?;
            let args = stages::MatchArgs {
                lexicon: &lexicon,
                documents: &docs,
                pages: &pages,
                ngram_range: ngrams,
                comparison_size,
                seed,
                stopwords: &sw,
            };
            Ok(stages::match_articles(&args, &out)?)
        }
        Command::AnalyzeRevisions {
            dump,
            bots,
            protection_log,
            samples,
            window,
            cutoff,
            horizon,
            secrets,
            out,
        } => {
            let mut files = vec![dump.as_path(), protection_log.as_path(), samples.as_path()];
            files.extend(bots.iter().map(PathBuf::as_path));
            require(&files)?;
            if horizon <= cutoff {
                return Err(Failure::Validation("--horizon must be after --cutoff".into()));
            }
            out_dir(&out)?;
            let mut redactor = Redactor::open(&secrets.unwrap_or_else(|| secrets_for(&out)))?;
            let args = stages::AnalyzeArgs {
                dump: &dump,
                bot_lists: &bots,
                protection_log: &protection_log,
                manifest: &samples,
                window,
                cutoff,
                horizon,
            };
            Ok(stages::analyze(&args, &mut redactor, &out)?)
        }
        Command::ScoreQuality {
            cache,
            revisions,
            samples,
            horizon,
            url,
            out,
        } => {
            require(&[&revisions, &samples])?;
            let c = client(mode, &cache)?;
            out_dir(&out)?;
            let manifest = SampleManifest::read(&samples)?;
            let revs = tables::read_revisions(&revisions)?;
            let (rows, missing) = stages::quality_series(&revs, &c, &scoring(url), horizon);
            stages::write_quality_series(&out.join("quality_monthly.tsv"), &rows, &manifest)?;
            c.save_cache()?;
            eprintln!("{} month-end scores, {missing} unavailable", rows.len());
            Ok(())
        }
        Command::ScoreDamaging {
            cache,
            revisions,
            threshold,
            url,
            out,
        } => {
            require(&[&revisions])?;
            if !(0.0..=1.0).contains(&threshold) {
                return Err(Failure::Validation("--threshold must lie in [0, 1]".into()));
            }
            let c = client(mode, &cache)?;
            out_dir(&out)?;
            let mut revs = tables::read_revisions(&revisions)?;
            let missing = stages::mark_damaging(&mut revs, &c, &scoring(url), threshold, &out.join("revision_scores.tsv"))?;
            c.save_cache()?;
            eprintln!("{missing} revisions unavailable");
            Ok(())
        }
        Command::FetchUsers {
            cache,
            contributors,
            secrets,
            snapshot,
            url,
            out,
        } => {
            require(&[&contributors])?;
            let c = client(mode, &cache)?;
            out_dir(&out)?;
            let redactor = Redactor::open(&secrets)?;
            let rows = tables::read_contributors(&contributors)?;
            let (profiles, flagged) =
                stages::profiles(&rows, &redactor, &c, &api(url), snapshot.unwrap_or_else(Utc::now))?;
            tables::write_profiles(&out.join("profiles.tsv"), &profiles)?;
            c.save_cache()?;
            eprintln!("{} profiles, {flagged} flagged", profiles.len());
            Ok(())
        }
        Command::FetchCategories {
            cache,
            samples,
            scope,
            url,
            out,
        } => {
            require(&[&samples])?;
            let c = client(mode, &cache)?;
            out_dir(&out)?;
            let manifest = SampleManifest::read(&samples)?;
            let rows = stages::scope(&manifest, &c, &api(url), &scope);
            tables::write_scope(&out.join("categories.tsv"), &rows)?;
            c.save_cache()?;
            Ok(())
        }
        Command::RankViews { pageviews, samples, out } => {
            require(&[&pageviews, &samples])?;
            out_dir(&out)?;
            let manifest = SampleManifest::read(&samples)?;
            let (ranks, missing) = stages::view_ranks(&pageviews, &manifest)?;
            tables::write_page_values(&out.join("view_ranks.tsv"), "mean_view_rank", &ranks)?;
            if !missing.is_empty() {
                eprintln!("{} articles without pageviews", missing.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
