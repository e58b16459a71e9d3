//! Acceptance suite: one PASS/FAIL/SKIPPED line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the output reads as a
//! checklist. Exits nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabooscope::dictionary::{NormalizedDocument, StopwordConfig};
use tabooscope::lexicon::{
    build_vocabulary, fit_ridge, induce_lexicon, vectorize_tfidf, CsrMatrix, InductionParams, NgramRange, RidgeOptions,
};
use tabooscope::matcher::{normalize_title, Sample, SampleManifest};
use tabooscope::pipeline::{config, report, run_pipeline};
use tabooscope::revisions::detect_reverts;
use tabooscope::stats::{
    chi_squared_2x2, logistic_fit, logistic_gradient, mann_whitney_u, ols_fit, DesignMatrix, LogisticOptions,
    MwuMethod, MwuOptions,
};

type Outcome = Result<String, String>;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini")
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// 1 ---------------------------------------------------------------------------

fn ridge_oracle(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let (n, m) = (x.len(), x[0].len());
    let xm = DMatrix::from_fn(n, m, |i, j| x[i][j]);
    let yv = DVector::from_column_slice(y);
    let a = xm.transpose() * &xm + DMatrix::identity(m, m) * lambda;
    let b = xm.transpose() * yv;
    a.cholesky().expect("ridge normal matrix is positive definite").solve(&b).iter().copied().collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lambdas = [0.1, 1.0, 10.0];
    let mut worst: f64 = 0.0;
    let start = Instant::now();
    for case in 0..50 {
        let m = rng.random_range(1..=10);
        let n = rng.random_range(1..=30);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let lambda = lambdas[case % 3];
        let csr = CsrMatrix::from_dense(&x).map_err(|e| e.to_string())?;
        let fit = fit_ridge(&csr, &y, lambda, &RidgeOptions::default()).map_err(|e| e.to_string())?;
        let oracle = ridge_oracle(&x, &y, lambda);
        for (a, b) in fit.weights.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    check(worst < 1e-8, format!("max abs error {worst:e} >= 1e-8"))?;
    check(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("max abs error {worst:.1e}, {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

// 2 ---------------------------------------------------------------------------

fn doc(tokens: &[&str], label: bool) -> NormalizedDocument {
    NormalizedDocument {
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        label,
    }
}

fn criterion_2() -> Outcome {
    let docs = [doc(&["a", "b"], false), doc(&["a"], false)];
    let vocab = build_vocabulary(&docs, NgramRange::new(1, 1).unwrap(), 1);
    let x = vectorize_tfidf(&docs, &vocab);
    let a = x.get(0, vocab.index_of("a").ok_or("no feature a")?);
    let b = x.get(0, vocab.index_of("b").ok_or("no feature b")?);
    check(
        (a - 0.580).abs() < 1e-3 && (b - 0.815).abs() < 1e-3,
        format!("d1 weights ({a:.4}, {b:.4})"),
    )?;
    Ok(format!("d1 = ({a:.3}, {b:.3})"))
}

// 3 ---------------------------------------------------------------------------

fn planted_corpus() -> Vec<NormalizedDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let words: Vec<String> = (0..60).map(|i| format!("w{i}")).collect();
    (0..200)
        .map(|i| {
            let len = rng.random_range(3..8);
            let mut tokens: Vec<String> = (0..len).map(|_| words[rng.random_range(0..words.len())].clone()).collect();
            let label = i % 20 == 0;
            if label {
                let at = rng.random_range(0..=tokens.len());
                tokens.insert(at, "zorble".into());
            }
            NormalizedDocument { tokens, label }
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let docs = planted_corpus();
    check(docs.iter().filter(|d| d.label).count() == 10, "expected 10 labeled definitions")?;
    let params = InductionParams::default();
    let first = induce_lexicon(&docs, &params).map_err(|e| e.to_string())?.lexicon;
    let second = induce_lexicon(&docs, &params).map_err(|e| e.to_string())?.lexicon;
    let top = first.entries.first().map(|e| e.ngram.clone()).unwrap_or_default();
    check(top == "zorble", format!("rank 1 is {top:?}"))?;
    check(first.entries == second.entries, "lexicon differs between runs")?;
    Ok(format!("zorble at rank 1 of {}, repeat identical", first.len()))
}

// 4 ---------------------------------------------------------------------------

/// Direct reading of the definition, quadratic in the window.
fn reverts_oracle(c: &[u8], window: usize) -> Vec<bool> {
    (0..c.len())
        .map(|r| ((r + 1)..=(r + window).min(c.len().saturating_sub(1))).any(|j| (0..r).any(|k| c[k] == c[j])))
        .collect()
}

fn as_strings(c: &[u8]) -> Vec<String> {
    c.iter().map(|b| (b'A' + b).to_string()).collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let len = rng.random_range(0..=50);
        let alphabet = rng.random_range(1..=5u8);
        let c: Vec<u8> = (0..len).map(|_| rng.random_range(0..alphabet)).collect();
        let got = detect_reverts(&as_strings(&c), 10);
        let want = reverts_oracle(&c, 10);
        check(got == want, format!("history {case} {c:?} disagrees"))?;
    }
    // A, B, then fillers, then A again at distance 10 or 11 from B.
    let boundary = |fillers: usize| {
        let mut c = vec![0u8, 1];
        c.extend((0..fillers).map(|i| 2 + i as u8));
        c.push(0);
        detect_reverts(&as_strings(&c), 10)[1]
    };
    check(boundary(9), "revert at distance 10 not flagged")?;
    check(!boundary(10), "revert at distance 11 flagged")?;
    Ok("1000 histories agree; distance 10 flagged, 11 not".into())
}

// 5 ---------------------------------------------------------------------------

fn u_of(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided p by enumerating every assignment of the pooled values.
fn exact_oracle(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (n1, n) = (a.len(), pooled.len());
    let centre = (a.len() * b.len()) as f64 / 2.0;
    let observed = (u_of(a, b) - centre).abs();
    let (mut total, mut extreme) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, v) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                x.push(*v);
            } else {
                y.push(*v);
            }
        }
        total += 1;
        if (u_of(&x, &y) - centre).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

fn criterion_5() -> Outcome {
    let exact = MwuOptions {
        method: MwuMethod::Exact,
        ..MwuOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = 0;
    for n1 in 1..=8 {
        for n2 in 1..=8 {
            for tied in [false, true] {
                let draw = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> {
                    (0..k)
                        .map(|_| {
                            if tied {
                                rng.random_range(0..4) as f64
                            } else {
                                rng.random_range(0.0..1.0)
                            }
                        })
                        .collect()
                };
                let a = draw(&mut rng, n1);
                let b = draw(&mut rng, n2);
                let got = mann_whitney_u(&a, &b, exact).map_err(|e| e.to_string())?;
                let want = exact_oracle(&a, &b);
                let constant = a.iter().chain(&b).all(|v| *v == a[0]);
                check(
                    constant || (got.p_value - want).abs() < 1e-12,
                    format!("n=({n1},{n2}) p {} vs oracle {want}", got.p_value),
                )?;
                check(got.statistic == u_of(&a, &b), format!("n=({n1},{n2}) U mismatch"))?;
                pairs += 1;
            }
        }
    }
    for _ in 0..100 {
        let a: Vec<f64> = (0..rng.random_range(1..30)).map(|_| rng.random_range(0..10) as f64).collect();
        let b: Vec<f64> = (0..rng.random_range(1..30)).map(|_| rng.random_range(0..10) as f64).collect();
        let u1 = mann_whitney_u(&a, &b, MwuOptions::default()).map_err(|e| e.to_string())?.statistic;
        let u2 = mann_whitney_u(&b, &a, MwuOptions::default()).map_err(|e| e.to_string())?.statistic;
        check(
            (u1 + u2 - (a.len() * b.len()) as f64).abs() < 1e-9,
            "U1 + U2 != n1 n2",
        )?;
    }
    let p = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], exact).map_err(|e| e.to_string())?.p_value;
    check((p - 1.0 / 3.0).abs() < 1e-12, format!("{{1,2}} vs {{3,4}} p = {p}"))?;
    Ok(format!("{pairs} size pairs agree; complementarity on 100 pairs; p = {p:.6}"))
}

// 6 ---------------------------------------------------------------------------

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn newton_oracle(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut beta = DVector::zeros(x.ncols());
    for _ in 0..100 {
        let p = (x * &beta).map(sigmoid);
        let grad = x.transpose() * (y - &p);
        let w = p.map(|v| v * (1.0 - v));
        let mut h = DMatrix::zeros(x.ncols(), x.ncols());
        for i in 0..x.nrows() {
            let row = x.row(i);
            h += row.transpose() * row * w[i];
        }
        let step = h.lu().solve(&grad).expect("Hessian invertible");
        beta += &step;
        if step.amax() < 1e-14 {
            break;
        }
    }
    beta
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_orth: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..20 {
        let n = 200;
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.4) { 1.0 } else { 0.0 }).collect();
        let design = DesignMatrix::with_intercept(n)
            .column_builder("x1", x1.clone())
            .and_then(|d| d.column_builder("x2", x2.clone()))
            .map_err(|e| e.to_string())?;

        let y_lin: Vec<f64> = (0..n).map(|i| 1.0 + 2.0 * x1[i] - x2[i] + rng.random_range(-1.0..1.0)).collect();
        let ols = ols_fit(&design, &y_lin).map_err(|e| e.to_string())?;
        let fitted = design.mul_vec(&ols.estimates);
        let resid: Vec<f64> = y_lin.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        for v in design.t_mul_vec(&resid) {
            worst_orth = worst_orth.max(v.abs());
        }

        let y_bin: Vec<f64> = (0..n)
            .map(|i| if rng.random_bool(sigmoid(-0.3 + 0.8 * x1[i] + 0.5 * x2[i])) { 1.0 } else { 0.0 })
            .collect();
        let fit = logistic_fit(&design, &y_bin, LogisticOptions::default()).map_err(|e| e.to_string())?;
        let g = logistic_gradient(&design, &y_bin, &fit.estimates);
        worst_grad = worst_grad.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
        let xm = DMatrix::from_fn(n, 3, |i, j| design.get(i, j));
        let oracle = newton_oracle(&xm, &DVector::from_column_slice(&y_bin));
        for (a, b) in fit.estimates.iter().zip(oracle.iter()) {
            worst_gap = worst_gap.max((a - b).abs());
        }
    }
    check(worst_orth < 1e-8, format!("OLS |X'e| = {worst_orth:e}"))?;
    check(worst_grad < 1e-6, format!("logistic gradient norm {worst_grad:e}"))?;
    check(worst_gap < 1e-6, format!("logistic vs Newton {worst_gap:e}"))?;
    let plain = chi_squared_2x2([[10.0, 0.0], [0.0, 10.0]], false).map_err(|e| e.to_string())?.statistic;
    let yates = chi_squared_2x2([[10.0, 0.0], [0.0, 10.0]], true).map_err(|e| e.to_string())?.statistic;
    check(
        (plain - 20.0).abs() < 1e-6 && (yates - 16.2).abs() < 1e-6,
        format!("chi2 {plain} / {yates}"),
    )?;
    Ok(format!(
        "OLS |X'e| {worst_orth:.1e}; logistic grad {worst_grad:.1e}, vs Newton {worst_gap:.1e}; chi2 {plain} / {yates}"
    ))
}

// 7, 8, 10 share fixture runs -------------------------------------------------

struct FixtureRun {
    _tmp: tempfile::TempDir,
    out: PathBuf,
    elapsed: Duration,
    error: Option<String>,
}

fn run_fixture() -> FixtureRun {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out = tmp.path().join("out");
    let start = Instant::now();
    let error = match config::load_config(&fixture_dir().join("config.toml"), None) {
        Err(problems) => Some(problems.join("; ")),
        Ok(mut cfg) => {
            cfg.output.dir = out.clone();
            cfg.output.secrets = tmp.path().join("secrets");
            run_pipeline(&cfg).err().map(|e| e.to_string())
        }
    };
    FixtureRun {
        _tmp: tmp,
        out,
        elapsed: start.elapsed(),
        error,
    }
}

fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<String, Vec<u8>>) {
        let Ok(entries) = std::fs::read_dir(dir) else { return };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                walk(root, &p, acc);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                acc.insert(rel, std::fs::read(&p).unwrap_or_default());
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc);
    acc
}

fn read_truth() -> Result<BTreeSet<(u64, String)>, String> {
    let text = std::fs::read_to_string(fixture_dir().join("truth.tsv")).map_err(|e| e.to_string())?;
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let id = f.get(1).and_then(|s| s.parse().ok()).ok_or(format!("bad truth row {l:?}"))?;
            Ok((id, f.get(2).copied().unwrap_or_default().to_string()))
        })
        .collect()
}

fn criterion_7(a: &FixtureRun, b: &FixtureRun) -> Outcome {
    for run in [a, b] {
        if let Some(e) = &run.error {
            return Err(format!("pipeline failed: {e}"));
        }
    }
    let slowest = a.elapsed.max(b.elapsed);
    check(slowest < Duration::from_secs(60), format!("run took {slowest:?}"))?;
    let first = files_under(&a.out.join("report"));
    let second = files_under(&b.out.join("report"));
    check(!first.is_empty(), "empty report bundle")?;
    check(
        first.keys().eq(second.keys()),
        "report bundles list different files",
    )?;
    for (name, bytes) in &first {
        check(second[name] == *bytes, format!("{name} differs between runs"))?;
    }
    let manifest = SampleManifest::read(&a.out.join("stages/match/manifest.tsv")).map_err(|e| e.to_string())?;
    let got: BTreeSet<(u64, String)> = manifest
        .entries
        .iter()
        .map(|e| {
            let s = match e.sample {
                Sample::Taboo => "taboo",
                Sample::Comparison => "comparison",
            };
            (e.page_id, s.to_string())
        })
        .collect();
    let truth = read_truth()?;
    check(got == truth, format!("partition {got:?} != truth {truth:?}"))?;
    Ok(format!(
        "{:.2} s per run, {} bundle files identical, partition of {} pages matches",
        slowest.as_secs_f64(),
        first.len(),
        truth.len()
    ))
}

fn criterion_8(run: &FixtureRun) -> Outcome {
    let tokens = normalize_title("Hell to the no", &StopwordConfig::english());
    check(tokens == ["hell"], format!("normalized to {tokens:?}"))?;
    if let Some(e) = &run.error {
        return Err(format!("pipeline failed: {e}"));
    }
    let manifest = SampleManifest::read(&run.out.join("stages/match/manifest.tsv")).map_err(|e| e.to_string())?;
    let entry = manifest
        .entries
        .iter()
        .find(|e| e.title == "Being Bobby Brown")
        .ok_or("Being Bobby Brown not in manifest")?;
    check(
        entry.sample == Sample::Taboo && entry.matched_title == "Hell to the no" && entry.ngram == "hell",
        format!("entry {entry:?}"),
    )?;
    Ok("\"Hell to the no\" -> [hell]; Being Bobby Brown taboo via redirect".into())
}

/// Account names and addresses that appear in the fixture inputs.
fn fixture_identities() -> Result<BTreeSet<String>, String> {
    let xml = std::fs::read_to_string(fixture_dir().join("history.xml")).map_err(|e| e.to_string())?;
    let mut found = BTreeSet::new();
    for tag in ["username", "ip"] {
        let open = format!("<{tag}>");
        let close = format!("</{tag}>");
        let mut rest = xml.as_str();
        while let Some(i) = rest.find(&open) {
            rest = &rest[i + open.len()..];
            if let Some(j) = rest.find(&close) {
                found.insert(rest[..j].to_string());
                rest = &rest[j..];
            }
        }
    }
    let users = std::fs::read_to_string(fixture_dir().join("cache/users.jsonl")).map_err(|e| e.to_string())?;
    for line in users.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if let Some(name) = v["key"].as_str().and_then(|k| k.strip_prefix("user:")) {
            found.insert(name.to_string());
        }
    }
    Ok(found)
}

/// Dotted quads with every part in 0..=255.
fn contains_ipv4(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() && (i == 0 || !(bytes[i - 1].is_ascii_digit() || bytes[i - 1] == b'.')) {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                j += 1;
            }
            let cand = text[i..j].trim_end_matches('.');
            let parts: Vec<&str> = cand.split('.').collect();
            if parts.len() == 4 && parts.iter().all(|p| !p.is_empty() && p.len() <= 3 && p.parse::<u16>().is_ok_and(|v| v <= 255)) {
                return Some(cand.to_string());
            }
            i = j;
        } else {
            i += 1;
        }
    }
    None
}

fn criterion_10(run: &FixtureRun) -> Outcome {
    if let Some(e) = &run.error {
        return Err(format!("pipeline failed: {e}"));
    }
    let identities = fixture_identities()?;
    check(identities.len() >= 10, format!("only {} identities extracted", identities.len()))?;
    let mut scanned = 0;
    for dir in ["report", "stages"] {
        for (name, bytes) in files_under(&run.out.join(dir)) {
            let text = String::from_utf8_lossy(&bytes);
            for id in &identities {
                check(!text.contains(id.as_str()), format!("{dir}/{name} contains {id:?}"))?;
            }
            if let Some(ip) = contains_ipv4(&text) {
                return Err(format!("{dir}/{name} contains address {ip}"));
            }
            scanned += 1;
        }
    }
    Ok(format!("{scanned} files clean of {} fixture identities and IPv4 strings", identities.len()))
}

// 9 ---------------------------------------------------------------------------

const REPLICATION_ENV: &str = "TABOOSCOPE_REPLICATION_DIR";

fn tsv_rows(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split('\t').collect();
    Ok(lines
        .filter(|l| !l.is_empty())
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split('\t').map(str::to_string)).collect())
        .collect())
}

/// The replication directory is a pipeline output root built from the
/// released tables: `config.toml` for parameters and a filled `stages/` tree.
fn criterion_9(dir: &Path) -> Outcome {
    let cfg = config::load_config(&dir.join("config.toml"), None).map_err(|p| p.join("; "))?;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    report::run_tests(dir, &cfg.parameters, &[], &[], tmp.path()).map_err(|e| e.to_string())?;

    let tests = tsv_rows(&tmp.path().join("tests.tsv"))?;
    let find = |section: &str, prefix: &str| {
        tests
            .iter()
            .find(|r| r["section"] == section && r["test"].starts_with(prefix))
            .cloned()
            .ok_or(format!("{section} {prefix} missing"))
    };
    let expected = [
        ("H1", "mean view rank", 189_375.0),
        ("H2", "contributions", 53_010.0),
        ("H3", "revert rate", 48_566.0),
        ("H3", "damaging rate", 56_225.0),
        ("H4", "mean quality", 87_747.0),
    ];
    for (section, prefix, want) in expected {
        let row = find(section, prefix)?;
        let u: f64 = row["statistic"].parse().map_err(|_| format!("{section} not run"))?;
        let sizes: Vec<f64> = row["sizes"].split('/').filter_map(|s| s.parse().ok()).collect();
        let product: f64 = sizes.iter().product();
        // U is reported for the taboo sample; either orientation is accepted.
        check(u == want || product - u == want, format!("{section} {prefix}: U = {u}, want {want}"))?;
    }
    let coef = tsv_rows(&tmp.path().join("regression_h3_revert_count.tsv"))?;
    let taboo: f64 = coef
        .iter()
        .find(|r| r["term"] == "Taboo")
        .and_then(|r| r["estimate"].parse().ok())
        .ok_or("no Taboo term")?;
    check((taboo - 49.5379).abs() <= 0.05, format!("Taboo = {taboo}"))?;
    let fits = tsv_rows(&tmp.path().join("regression_fits.tsv"))?;
    let r2: f64 = fits
        .iter()
        .find(|r| r["model"] == "h3_revert_count")
        .and_then(|r| r["r_squared"].parse().ok())
        .ok_or("no R squared")?;
    check((r2 - 0.9590).abs() <= 0.001, format!("R2 = {r2}"))?;
    let h5a: f64 = find("H5", "H5A")?["statistic"].parse().map_err(|_| "H5A not run")?;
    check(h5a > 0.0, format!("H5A taboo coefficient statistic {h5a}"))?;
    Ok(format!("Taboo {taboo:.4}, R2 {r2:.4}, U statistics exact, H5A positive"))
}

// ---------------------------------------------------------------------------

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, what: &str, outcome: Option<Outcome>| {
        match outcome {
            Some(Ok(detail)) => println!("criterion {n}: PASS: {what} ({detail})"),
            Some(Err(why)) => {
                failed += 1;
                println!("criterion {n}: FAIL: {what} ({why})");
            }
            None => println!("criterion {n}: SKIPPED: {what} (set {REPLICATION_ENV} to a replication output root)"),
        }
    };
    report(1, "ridge CG matches direct normal-equation solve", Some(criterion_1()));
    report(2, "TF-IDF two-document example", Some(criterion_2()));
    report(3, "planted euphemism recovered at rank 1", Some(criterion_3()));
    report(4, "revert detection matches brute force", Some(criterion_4()));
    report(5, "Mann-Whitney U exact enumeration and identities", Some(criterion_5()));
    report(6, "OLS, logistic and chi-squared cross-checks", Some(criterion_6()));
    let first = run_fixture();
    let second = run_fixture();
    report(7, "fixture pipeline: speed, determinism, partition", Some(criterion_7(&first, &second)));
    report(8, "title normalization and redirect matching", Some(criterion_8(&first)));
    let replication = std::env::var_os(REPLICATION_ENV).map(PathBuf::from);
    report(9, "replication dataset reproduction (optional)", replication.as_deref().map(criterion_9));
    report(10, "redaction scan of emitted outputs", Some(criterion_10(&first)));
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
