//! Orchestration behaviour: validation, resume, failure handling and the CLI.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use tabooscope::pipeline::{config, run_pipeline, PipelineError, StageStatus, STAGES};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini")
}

/// Copies the fixture inputs into a scratch directory and points the output
/// there too. `edit` may rewrite the config text.
fn scratch(edit: impl Fn(String) -> String) -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let src = fixture_dir();
    for name in ["dictionary.jsonl", "history.xml", "bots.txt", "protection.jsonl", "pageviews.tsv"] {
        std::fs::copy(src.join(name), tmp.path().join(name)).unwrap();
    }
    std::fs::create_dir(tmp.path().join("cache")).unwrap();
    for name in ["quality", "damaging", "users", "categories"] {
        let f = format!("cache/{name}.jsonl");
        std::fs::copy(src.join(&f), tmp.path().join(&f)).unwrap();
    }
    let text = std::fs::read_to_string(src.join("config.toml"))
        .unwrap()
        .replace("../../../../target/fixture-run", "out");
    let cfg = tmp.path().join("config.toml");
    std::fs::write(&cfg, edit(text)).unwrap();
    (tmp, cfg)
}

fn bundle(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn run(cfg: &Path) -> Result<tabooscope::pipeline::RunSummary, PipelineError> {
    let c = config::load_config(cfg, None).map_err(PipelineError::Validation)?;
    run_pipeline(&c)
}

#[test]
fn resumed_run_reuses_every_stage_and_matches_fresh_bundle() {
    let (tmp, cfg) = scratch(|t| t);
    let first = run(&cfg).unwrap();
    assert!(first.stages.iter().all(|(_, s)| *s == StageStatus::Ran));
    let fresh = bundle(&first.report_dir);

    let second = run(&cfg).unwrap();
    let names: Vec<&str> = second.stages.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, STAGES);
    assert!(second.stages.iter().all(|(_, s)| *s == StageStatus::Reused));
    assert_eq!(bundle(&second.report_dir), fresh);

    // Wipe the report only; the test stage reruns and reproduces it.
    std::fs::remove_dir_all(tmp.path().join("out/report")).unwrap();
    let third = run(&cfg).unwrap();
    assert_eq!(third.stages.last().unwrap(), &("test", StageStatus::Ran));
    assert_eq!(bundle(&third.report_dir), fresh);
}

#[test]
fn parameter_change_reruns_only_downstream_stages() {
    let (_tmp, cfg) = scratch(|t| t);
    run(&cfg).unwrap();
    let text = std::fs::read_to_string(&cfg).unwrap().replace("damaging_threshold = 0.5", "damaging_threshold = 0.9");
    std::fs::write(&cfg, text).unwrap();
    let again = run(&cfg).unwrap();
    let ran: Vec<&str> = again.stages.iter().filter(|(_, s)| *s == StageStatus::Ran).map(|(n, _)| *n).collect();
    assert_eq!(ran, ["enrich", "test"]);
}

#[test]
fn report_cites_parameters_inputs_and_sources() {
    let (_tmp, cfg) = scratch(|t| t);
    let summary = run(&cfg).unwrap();
    let report = std::fs::read_to_string(summary.report_dir.join("report.txt")).unwrap();
    for needle in ["seed", "20230415", "history.xml", "stages/enrich/article_metrics.tsv", "== H1", "== H5"] {
        assert!(report.contains(needle), "report.txt lacks {needle}");
    }
    let tests = std::fs::read_to_string(summary.report_dir.join("tests.tsv")).unwrap();
    for line in tests.lines().skip(1) {
        let source = line.split('\t').nth(7).unwrap();
        for part in source.split(", ") {
            assert!(summary.report_dir.parent().unwrap().join(part).is_file(), "missing source {part}");
        }
    }
}

#[test]
fn validation_lists_every_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.toml");
    std::fs::write(&cfg, "[parameters]\nlambda = -1\n").unwrap();
    let err = config::load_config(&cfg, None).unwrap_err();
    let joined = err.join("\n");
    for field in ["inputs.dictionary", "inputs.dump", "parameters.seed", "parameters.lambda", "output.dir"] {
        assert!(joined.contains(field), "{field} not reported in {joined}");
    }
    assert_eq!(PipelineError::Validation(err).exit_code(), 1);
}

#[test]
fn missing_input_file_is_a_validation_error() {
    let (_tmp, cfg) = scratch(|t| t.replace("pageviews.tsv", "nowhere.tsv"));
    let err = run(&cfg).unwrap_err();
    assert!(matches!(err, PipelineError::Validation(_)));
    assert!(err.to_string().contains("nowhere.tsv"));
}

#[test]
fn stage_failure_keeps_upstream_outputs() {
    let (tmp, cfg) = scratch(|t| t);
    std::fs::write(tmp.path().join("history.xml"), "<mediawiki><page><title>Broken").unwrap();
    let err = run(&cfg).unwrap_err();
    match &err {
        PipelineError::Stage { stage, .. } => assert_eq!(*stage, "match"),
        other => panic!("expected a stage failure, got {other}"),
    }
    assert_eq!(err.exit_code(), 2);
    let out = tmp.path().join("out");
    assert!(out.join("stamps/ingest").is_file());
    assert!(out.join("stamps/induce").is_file());
    assert!(out.join("stages/induce/lexicon.tsv").is_file());
    assert!(!out.join("stamps/match").exists());
}

#[test]
fn empty_comparison_sample_marks_tests_not_run() {
    let (_tmp, cfg) = scratch(|t| t.replace("comparison_size = 16", "comparison_size = 0"));
    let summary = run(&cfg).unwrap();
    let tests = std::fs::read_to_string(summary.report_dir.join("tests.tsv")).unwrap();
    let h1 = tests.lines().find(|l| l.starts_with("H1\t")).unwrap();
    assert!(h1.contains("not run"), "{h1}");
    let report = std::fs::read_to_string(summary.report_dir.join("report.txt")).unwrap();
    assert!(report.contains("not run:"));
}

// CLI -------------------------------------------------------------------------

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tabooscope"))
}

#[test]
fn cli_exit_codes() {
    let (tmp, cfg) = scratch(|t| t);
    let ok = cli().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let missing = cli().args(["run", "--config", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let usage = cli().arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(1));

    let bad_mode = cli().args(["--mode", "sideways", "run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(bad_mode.status.code(), Some(1));

    std::fs::write(tmp.path().join("history.xml"), "<mediawiki><page><title>Broken").unwrap();
    let failed = cli().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(failed.status.code(), Some(2));
}

#[test]
fn cli_stage_subcommands_chain() {
    let src = fixture_dir();
    let tmp = tempfile::tempdir().unwrap();
    let d = |name: &str| tmp.path().join(name);
    let step = |args: Vec<String>| {
        let out = cli().args(&args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    let s = |p: PathBuf| p.to_string_lossy().into_owned();

    step(vec!["ingest-dictionary".into(), "--input".into(), s(src.join("dictionary.jsonl")), "--out".into(), s(d("ingest"))]);
    step(vec![
        "induce-lexicon".into(), "--docs".into(), s(d("ingest/documents.tsv")), "--out".into(), s(d("induce")),
    ]);
    step(vec![
        "match-articles".into(), "--lexicon".into(), s(d("induce/lexicon.tsv")), "--pages".into(), s(src.join("history.xml")),
        "--docs".into(), s(d("ingest/documents.tsv")), "--comparison-size".into(), "16".into(), "--seed".into(),
        "20230415".into(), "--out".into(), s(d("match")),
    ]);
    step(vec![
        "analyze-revisions".into(), "--dump".into(), s(src.join("history.xml")), "--bots".into(), s(src.join("bots.txt")),
        "--protection-log".into(), s(src.join("protection.jsonl")), "--samples".into(), s(d("match/manifest.tsv")),
        "--horizon".into(), "2013-01-01".into(), "--secrets".into(), s(d("secrets")), "--out".into(), s(d("analyze")),
    ]);
    step(vec![
        "--mode".into(), "fixture".into(), "score-quality".into(), "--cache".into(), s(src.join("cache/quality.jsonl")),
        "--revisions".into(), s(d("analyze/revisions.tsv")), "--samples".into(), s(d("match/manifest.tsv")),
        "--horizon".into(), "2013-01-01".into(), "--out".into(), s(d("quality")),
    ]);
    step(vec![
        "--mode".into(), "fixture".into(), "score-damaging".into(), "--cache".into(), s(src.join("cache/damaging.jsonl")),
        "--revisions".into(), s(d("analyze/revisions.tsv")), "--out".into(), s(d("damaging")),
    ]);
    step(vec![
        "--mode".into(), "fixture".into(), "fetch-users".into(), "--cache".into(), s(src.join("cache/users.jsonl")),
        "--contributors".into(), s(d("analyze/contributors.tsv")), "--secrets".into(), s(d("secrets")),
        "--snapshot".into(), "2013-01-01".into(), "--out".into(), s(d("users")),
    ]);
    step(vec![
        "--mode".into(), "fixture".into(), "fetch-categories".into(), "--cache".into(),
        s(src.join("cache/categories.jsonl")), "--samples".into(), s(d("match/manifest.tsv")), "--out".into(), s(d("categories")),
    ]);
    step(vec![
        "rank-views".into(), "--pageviews".into(), s(src.join("pageviews.tsv")), "--samples".into(),
        s(d("match/manifest.tsv")), "--out".into(), s(d("views")),
    ]);

    for f in [
        "ingest/documents.tsv",
        "induce/lexicon.tsv",
        "match/manifest.tsv",
        "analyze/revisions.tsv",
        "analyze/contributors.tsv",
        "quality/quality_monthly.tsv",
        "damaging/revision_scores.tsv",
        "users/profiles.tsv",
        "categories/categories.tsv",
        "views/view_ranks.tsv",
    ] {
        assert!(d(f).is_file(), "{f} missing");
    }
    // Same manifest as the config-driven run.
    let manifest = std::fs::read_to_string(d("match/manifest.tsv")).unwrap();
    assert!(manifest.contains("Being Bobby Brown"));
    assert_eq!(manifest.lines().count(), 1 + 25);
}
