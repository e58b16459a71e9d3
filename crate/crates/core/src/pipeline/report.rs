//! The test stage: hypothesis suites, validation, and the report bundle.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::config::Parameters;
use super::tables::{self, num, opt, ProfileRow};
use crate::lexicon::TabooLexicon;
use crate::matcher::{Sample, SampleManifest};
use crate::revisions::ArticleMetrics;
use crate::stats::{
    chi_squared_2x2, logistic_fit, mann_whitney_u, ols_fit, DesignMatrix, LogisticOptions, MwuOptions,
    RegressionFit, TestResult,
};
use crate::tsv::TsvWriter;
use crate::{Error, Result};

/// Where the test stage finds its inputs, relative to the output directory.
pub struct Sources {
    pub lexicon: &'static str,
    pub manifest: &'static str,
    pub match_summary: &'static str,
    pub revisions: &'static str,
    pub protection: &'static str,
    pub metrics: &'static str,
    pub profiles: &'static str,
    pub scope: &'static str,
    pub quality: &'static str,
}

pub const SOURCES: Sources = Sources {
    lexicon: "stages/induce/lexicon.tsv",
    manifest: "stages/match/manifest.tsv",
    match_summary: "stages/match/summary.tsv",
    revisions: "stages/analyze/revisions.tsv",
    protection: "stages/analyze/protection.tsv",
    metrics: "stages/enrich/article_metrics.tsv",
    profiles: "stages/enrich/profiles.tsv",
    scope: "stages/enrich/categories.tsv",
    quality: "stages/enrich/quality_monthly.tsv",
};

/// One cited input file: label, base name, sha256.
pub type InputDigest = (String, String, String);

enum Outcome {
    Test(TestResult),
    Regression(String, RegressionFit),
    NotRun(String),
}

struct Entry {
    section: &'static str,
    name: String,
    source: String,
    outcome: Outcome,
}

struct Suite {
    entries: Vec<Entry>,
    mwu: MwuOptions,
    yates: bool,
}

impl Suite {
    fn push(&mut self, section: &'static str, name: &str, source: &str, outcome: Result<Outcome>) {
        let outcome = outcome.unwrap_or_else(|e| Outcome::NotRun(e.to_string()));
        self.entries.push(Entry {
            section,
            name: name.to_string(),
            source: source.to_string(),
            outcome,
        });
    }

    fn mwu(&mut self, section: &'static str, name: &str, source: &str, groups: (Vec<f64>, Vec<f64>)) {
        let (taboo, comparison) = groups;
        let outcome = if taboo.is_empty() || comparison.is_empty() {
            Ok(Outcome::NotRun(format!(
                "empty sample (taboo {}, comparison {})",
                taboo.len(),
                comparison.len()
            )))
        } else {
            mann_whitney_u(&taboo, &comparison, self.mwu).map(Outcome::Test)
        };
        self.push(section, name, source, outcome);
    }

    fn chi2(&mut self, section: &'static str, name: &str, source: &str, table: [[f64; 2]; 2]) {
        let yates = self.yates;
        self.push(section, name, source, chi_squared_2x2(table, yates).map(Outcome::Test));
    }
}

fn split<F: Fn(&ArticleMetrics) -> Option<f64>>(metrics: &[ArticleMetrics], f: F) -> (Vec<f64>, Vec<f64>) {
    let mut taboo = Vec::new();
    let mut comparison = Vec::new();
    for m in metrics {
        if let Some(v) = f(m) {
            match m.sample {
                Sample::Taboo => taboo.push(v),
                Sample::Comparison => comparison.push(v),
            }
        }
    }
    (taboo, comparison)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn is_taboo(m: &ArticleMetrics) -> f64 {
    indicator(m.sample == Sample::Taboo)
}

/// Rows: ever edited a taboo article (yes, no). Columns: `flag` (yes, no).
fn contingency<'a>(rows: impl Iterator<Item = &'a ProfileRow>, flag: impl Fn(&ProfileRow) -> bool) -> [[f64; 2]; 2] {
    let mut t = [[0.0; 2]; 2];
    for r in rows {
        t[usize::from(!r.ever_edited_taboo)][usize::from(!flag(r))] += 1.0;
    }
    t
}

fn need_both_samples(metrics: &[ArticleMetrics]) -> Result<()> {
    let taboo = metrics.iter().filter(|m| m.sample == Sample::Taboo).count();
    if taboo == 0 || taboo == metrics.len() {
        return Err(Error::Argument(format!(
            "empty sample (taboo {}, comparison {})",
            taboo,
            metrics.len() - taboo
        )));
    }
    Ok(())
}

fn h3_regression(metrics: &[ArticleMetrics]) -> Result<Outcome> {
    need_both_samples(metrics)?;
    let x = DesignMatrix::with_intercept(metrics.len())
        .column_builder("Taboo", metrics.iter().map(is_taboo).collect())?
        .column_builder("Contribution Count", metrics.iter().map(|m| m.n_contributions as f64).collect())?;
    let y: Vec<f64> = metrics.iter().map(|m| m.n_reverted as f64).collect();
    ols_fit(&x, &y).map(|f| Outcome::Regression("h3_revert_count".into(), f))
}

fn h5a_regression(
    revisions: &BTreeMap<u64, Vec<crate::revisions::RevisionRecord>>,
    manifest: &SampleManifest,
    protection: &BTreeMap<u64, f64>,
) -> Result<Outcome> {
    let samples: HashMap<u64, Sample> = manifest.entries.iter().map(|e| (e.page_id, e.sample)).collect();
    let mut taboo = Vec::new();
    let mut prot = Vec::new();
    let mut y = Vec::new();
    for (page, revs) in revisions {
        let Some(&sample) = samples.get(page) else { continue };
        let p = protection.get(page).copied().unwrap_or(0.0);
        for r in revs {
            taboo.push(indicator(sample == Sample::Taboo));
            prot.push(p);
            y.push(indicator(!r.contributor.has_account()));
        }
    }
    if !taboo.contains(&1.0) || !taboo.contains(&0.0) {
        return Err(Error::Argument("revisions from only one sample".into()));
    }
    let x = DesignMatrix::with_intercept(y.len())
        .column_builder("Taboo", taboo)?
        .column_builder("Protection Level", prot)?;
    logistic_fit(&x, &y, LogisticOptions::default()).map(|f| Outcome::Regression("h5a_no_account".into(), f))
}

fn h5b_regression(metrics: &[ArticleMetrics]) -> Result<Outcome> {
    let rows: Vec<&ArticleMetrics> = metrics.iter().filter(|m| m.mean_editor_experience.is_some()).collect();
    let owned: Vec<ArticleMetrics> = rows.iter().map(|m| (*m).clone()).collect();
    need_both_samples(&owned)?;
    let x = DesignMatrix::with_intercept(rows.len())
        .column_builder("Taboo", rows.iter().map(|m| is_taboo(m)).collect())?
        .column_builder("Protection Level", rows.iter().map(|m| m.protected_proportion).collect())?;
    let y: Vec<f64> = rows.iter().map(|m| m.mean_editor_experience.unwrap_or(1.0).ln()).collect();
    ols_fit(&x, &y).map(|f| Outcome::Regression("h5b_log_experience".into(), f))
}

fn validation_regression(scope: &[tables::ScopeRow]) -> Result<Outcome> {
    let x = DesignMatrix::with_intercept(scope.len())
        .column_builder("In Scope", scope.iter().map(|r| indicator(r.in_scope)).collect())?;
    let y: Vec<f64> = scope.iter().map(|r| indicator(r.sample == Sample::Taboo)).collect();
    if !y.contains(&1.0) || !y.contains(&0.0) {
        return Err(Error::Argument("articles from only one sample".into()));
    }
    logistic_fit(&x, &y, LogisticOptions::default()).map(|f| Outcome::Regression("validation_scope".into(), f))
}

fn inverse_logit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn short(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "NA".into())
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 })
}

pub fn formatted_estimate(fit: &RegressionFit, i: usize) -> String {
    format!("{:.4} [{:.4}; {:.4}]", fit.estimates[i], fit.ci_lower[i], fit.ci_upper[i])
}

fn write_regression(path: &Path, fit: &RegressionFit) -> Result<()> {
    let mut w = TsvWriter::create(
        path,
        &["term", "estimate", "ci_lower", "ci_upper", "formatted", "std_error", "statistic", "p_value"],
    )?;
    for i in 0..fit.names.len() {
        w.row(&[
            fit.names[i].clone(),
            num(fit.estimates[i]),
            num(fit.ci_lower[i]),
            num(fit.ci_upper[i]),
            formatted_estimate(fit, i),
            num(fit.std_errors[i]),
            num(fit.statistics[i]),
            num(fit.p_values[i]),
        ])?;
    }
    w.finish()
}

const SECTIONS: [(&str, &str); 6] = [
    ("H1", "readership"),
    ("H2", "contribution quantity"),
    ("H3", "contribution quality"),
    ("H4", "article quality"),
    ("H5", "contributor identifiability"),
    ("Validation", "taboo set against topical scope"),
];

/// Runs every test and writes the bundle into `out`. `root` is the output
/// directory all stage files are read from.
pub fn run_tests(
    root: &Path,
    params: &Parameters,
    inputs: &[InputDigest],
    stage_files: &[String],
    out: &Path,
) -> Result<()> {
    let s = &SOURCES;
    let manifest = SampleManifest::read(&root.join(s.manifest))?;
    let lexicon = TabooLexicon::read(&root.join(s.lexicon))?;
    let metrics = tables::read_metrics(&root.join(s.metrics))?;
    let revisions = tables::read_revisions(&root.join(s.revisions))?;
    let protection = tables::read_page_values(&root.join(s.protection), "protected_proportion")?;
    let profiles = tables::read_profiles(&root.join(s.profiles))?;
    let scope = tables::read_scope(&root.join(s.scope))?;
    let match_summary = tables::read_summary(&root.join(s.match_summary))?;

    let mut suite = Suite {
        entries: Vec::new(),
        mwu: MwuOptions {
            method: params.mwu_method,
            continuity: params.mwu_continuity,
        },
        yates: params.yates,
    };
    suite.mwu("H1", "mean view rank (Mann-Whitney U)", s.metrics, split(&metrics, |m| m.mean_view_rank));
    suite.mwu(
        "H2",
        "contributions (Mann-Whitney U)",
        s.metrics,
        split(&metrics, |m| Some(m.n_contributions as f64)),
    );
    suite.mwu("H3", "revert rate (Mann-Whitney U)", s.metrics, split(&metrics, |m| Some(m.revert_rate)));
    suite.mwu(
        "H3",
        "damaging rate (Mann-Whitney U)",
        s.metrics,
        split(&metrics, |m| Some(m.damaging_rate)),
    );
    suite.push("H3", "revert count ~ taboo + contribution count (OLS)", s.metrics, h3_regression(&metrics));
    suite.mwu("H4", "mean quality (Mann-Whitney U)", s.metrics, split(&metrics, |m| m.mean_quality));
    let h5a_source = format!("{}, {}, {}", s.revisions, s.manifest, s.protection);
    suite.push(
        "H5",
        "H5A no account ~ taboo + protection (pooled logistic; approximation of a random-intercept model, sign only)",
        &h5a_source,
        h5a_regression(&revisions, &manifest, &protection),
    );
    suite.mwu(
        "H5",
        "H5B mean editor experience (Mann-Whitney U)",
        s.metrics,
        split(&metrics, |m| m.mean_editor_experience),
    );
    suite.push(
        "H5",
        "H5B ln(mean editor experience) ~ taboo + protection (OLS)",
        s.metrics,
        h5b_regression(&metrics),
    );
    suite.chi2(
        "H5",
        "H5C user page x ever edited taboo (chi-squared)",
        s.profiles,
        contingency(profiles.iter(), |r| r.has_user_page),
    );
    suite.chi2(
        "H5",
        "H5D gender specified x ever edited taboo (chi-squared)",
        s.profiles,
        contingency(profiles.iter(), |r| r.gender_specified),
    );
    suite.chi2(
        "H5",
        "H5D female among gender specified x ever edited taboo (chi-squared)",
        s.profiles,
        contingency(profiles.iter().filter(|r| r.female.is_some()), |r| r.female == Some(true)),
    );
    suite.chi2(
        "H5",
        "H5E emailable x ever edited taboo (chi-squared)",
        s.profiles,
        contingency(profiles.iter(), |r| r.emailable),
    );
    suite.push(
        "Validation",
        "taboo ~ in scope (logistic)",
        s.scope,
        validation_regression(&scope),
    );

    write_tests_table(&out.join("tests.tsv"), &suite.entries)?;
    let mut fits = TsvWriter::create(
        &out.join("regression_fits.tsv"),
        &["model", "n", "r_squared", "adj_r_squared", "log_likelihood", "iterations"],
    )?;
    for e in &suite.entries {
        if let Outcome::Regression(model, fit) = &e.outcome {
            write_regression(&out.join(format!("regression_{model}.tsv")), fit)?;
            fits.row(&[
                model.clone(),
                fit.n.to_string(),
                opt(fit.r_squared),
                opt(fit.adj_r_squared),
                opt(fit.log_likelihood),
                fit.iterations.map(|i| i.to_string()).unwrap_or_else(|| "NA".into()),
            ])?;
        }
    }
    fits.finish()?;

    write_boxplot_source(&out.join("boxplot_source.tsv"), &metrics)?;
    std::fs::copy(root.join(s.quality), out.join("quality_monthly.tsv")).map_err(|e| Error::io(root.join(s.quality), e))?;
    std::fs::copy(root.join(s.metrics), out.join("article_metrics.tsv")).map_err(|e| Error::io(root.join(s.metrics), e))?;
    let taboo_list = taboo_articles(&manifest, &lexicon);
    let mut w = TsvWriter::create(&out.join("taboo_articles.tsv"), &["title", "ngram", "rank"])?;
    for (title, ngram, rank) in &taboo_list {
        w.row(&[title.clone(), ngram.clone(), rank.map(|r| r.to_string()).unwrap_or_else(|| "NA".into())])?;
    }
    w.finish()?;

    let text = render(params, inputs, stage_files, &manifest, &match_summary, &metrics, &taboo_list, &suite.entries);
    std::fs::write(out.join("report.txt"), text).map_err(|e| Error::io(out.join("report.txt"), e))
}

fn taboo_articles(manifest: &SampleManifest, lexicon: &TabooLexicon) -> Vec<(String, String, Option<usize>)> {
    let mut rows: Vec<_> = manifest
        .entries
        .iter()
        .filter(|e| e.sample == Sample::Taboo)
        .map(|e| (e.title.clone(), e.ngram.clone(), lexicon.rank_of(&e.ngram)))
        .collect();
    rows.sort_by(|a, b| a.2.unwrap_or(usize::MAX).cmp(&b.2.unwrap_or(usize::MAX)).then_with(|| a.0.cmp(&b.0)));
    rows
}

type Panel = fn(&ArticleMetrics) -> Option<f64>;

fn write_boxplot_source(path: &Path, metrics: &[ArticleMetrics]) -> Result<()> {
    let panels: [(&str, Panel); 5] = [
        ("view_rank", |m| m.mean_view_rank),
        ("contributions", |m| Some(m.n_contributions as f64)),
        ("revert_rate", |m| Some(m.revert_rate)),
        ("damaging_rate", |m| Some(m.damaging_rate)),
        ("quality", |m| m.mean_quality),
    ];
    let mut w = TsvWriter::create(path, &["panel", "page_id", "sample", "value"])?;
    for (panel, f) in panels {
        for m in metrics {
            if let Some(v) = f(m) {
                w.row(&[panel.to_string(), m.page_id.to_string(), m.sample.as_str().to_string(), num(v)])?;
            }
        }
    }
    w.finish()
}

fn write_tests_table(path: &Path, entries: &[Entry]) -> Result<()> {
    let mut w = TsvWriter::create(
        path,
        &["section", "test", "status", "statistic", "p_value", "sizes", "direction", "source", "notes"],
    )?;
    for e in entries {
        let row = match &e.outcome {
            Outcome::Test(t) => [
                "run".to_string(),
                num(t.statistic),
                num(t.p_value),
                sizes(&t.sizes),
                t.direction.to_string(),
                t.notes.join("; "),
            ],
            Outcome::Regression(model, f) => {
                let i = f.names.iter().position(|n| n != "(Intercept)").unwrap_or(0);
                [
                    "run".to_string(),
                    num(f.statistics[i]),
                    num(f.p_values[i]),
                    f.n.to_string(),
                    crate::stats::sign(f.estimates[i]).to_string(),
                    format!("{} coefficient; table regression_{model}.tsv", f.names[i]),
                ]
            }
            Outcome::NotRun(reason) => [
                "not run".to_string(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                reason.clone(),
            ],
        };
        let [status, stat, p, n, dir, notes] = row;
        w.row(&[e.section.to_string(), e.name.clone(), status, stat, p, n, dir, e.source.clone(), notes])?;
    }
    w.finish()
}

fn sizes(s: &[usize]) -> String {
    s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("/")
}

#[allow(clippy::too_many_arguments)]
fn render(
    params: &Parameters,
    inputs: &[InputDigest],
    stage_files: &[String],
    manifest: &SampleManifest,
    match_summary: &BTreeMap<String, String>,
    metrics: &[ArticleMetrics],
    taboo_list: &[(String, String, Option<usize>)],
    entries: &[Entry],
) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "tabooscope report\n");
    let _ = writeln!(t, "Parameters");
    for (k, v) in params.echo() {
        let _ = writeln!(t, "  {k} = {v}");
    }
    let _ = writeln!(t, "\nInputs (sha256)");
    for (label, name, hash) in inputs {
        let _ = writeln!(t, "  {label}: {name} {hash}");
    }
    let _ = writeln!(t, "\nStage files (relative to the output directory)");
    for f in stage_files {
        let _ = writeln!(t, "  {f}");
    }

    let n_taboo = manifest.ids(Sample::Taboo).len();
    let population = match_summary.get("comparison_population").map(String::as_str).unwrap_or("NA");
    let n_comp = manifest.ids(Sample::Comparison).len();
    let _ = writeln!(t, "\nSamples (source: {})", SOURCES.manifest);
    let _ = writeln!(t, "  taboo articles: {n_taboo}");
    let _ = writeln!(t, "  comparison articles: {n_comp} of {population} candidates (source: {})", SOURCES.match_summary);
    let _ = writeln!(t, "  articles with revisions: {} (source: {})", metrics.len(), SOURCES.metrics);
    let _ = writeln!(t, "\nTaboo articles (source: taboo_articles.tsv)");
    for (title, ngram, rank) in taboo_list {
        let rank = rank.map(|r| r.to_string()).unwrap_or_else(|| "NA".into());
        let _ = writeln!(t, "  {title}\t{ngram}\t{rank}");
    }

    for (section, title) in SECTIONS {
        let _ = writeln!(t, "\n== {section}: {title} ==");
        let panel = match section {
            "H1" => Some(("view rank", split(metrics, |m| m.mean_view_rank))),
            "H2" => Some(("contributions", split(metrics, |m| Some(m.n_contributions as f64)))),
            "H3" => Some(("revert rate", split(metrics, |m| Some(m.revert_rate)))),
            "H4" => Some(("quality", split(metrics, |m| m.mean_quality))),
            _ => None,
        };
        if let Some((label, (a, b))) = panel {
            let _ = writeln!(
                t,
                "  median {label}: taboo {} (n={}), comparison {} (n={}) (source: boxplot_source.tsv)",
                short(median(&a)),
                a.len(),
                short(median(&b)),
                b.len()
            );
        }
        if section == "H3" {
            let (a, b) = split(metrics, |m| Some(m.damaging_rate));
            let _ = writeln!(
                t,
                "  median damaging rate: taboo {}, comparison {} (source: boxplot_source.tsv)",
                short(median(&a)),
                short(median(&b))
            );
        }
        for e in entries.iter().filter(|e| e.section == section) {
            let _ = writeln!(t, "  {} (source: {})", e.name, e.source);
            match &e.outcome {
                Outcome::Test(r) => {
                    let _ = writeln!(
                        t,
                        "    statistic = {}, p = {}, sizes = {}, direction = {:+}",
                        num(r.statistic),
                        num(r.p_value),
                        sizes(&r.sizes),
                        r.direction
                    );
                    for note in &r.notes {
                        let _ = writeln!(t, "    note: {note}");
                    }
                }
                Outcome::Regression(model, f) => {
                    let _ = writeln!(t, "    table: regression_{model}.tsv");
                    for i in 0..f.names.len() {
                        let _ = writeln!(t, "    {:<20} {}", f.names[i], formatted_estimate(f, i));
                    }
                    if let Some(r2) = f.r_squared {
                        let _ = writeln!(t, "    R^2 = {:.4}, adj. R^2 = {}", r2, short(f.adj_r_squared));
                    }
                    if let Some(ll) = f.log_likelihood {
                        let _ = writeln!(t, "    log likelihood = {:.4}", ll);
                    }
                    let _ = writeln!(t, "    n = {}", f.n);
                    if section == "Validation" {
                        if let (Some(a), Some(b)) = (f.coefficient("(Intercept)"), f.coefficient("In Scope")) {
                            let _ = writeln!(t, "    P(taboo | in scope) = {:.4}", inverse_logit(a + b));
                        }
                    }
                }
                Outcome::NotRun(reason) => {
                    let _ = writeln!(t, "    not run: {reason}");
                }
            }
        }
    }
    t
}
