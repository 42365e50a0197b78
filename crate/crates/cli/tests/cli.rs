use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hon_anomaly::corpus::CorpusBuilder;
use hon_anomaly::detector::{DetectorConfig, Representation};
use hon_anomaly::distances::{MetricKind, SpectralParams};
use hon_anomaly::rule_miner::MinerConfig;
use hon_anomaly_cli::pipeline::analyze;

fn honad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_honad"))
        .args(args)
        .output()
        .expect("spawn honad")
}

fn code(args: &[&str]) -> i32 {
    honad(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_corpus(dir: &Path, windows_per_regime: &str) -> std::path::PathBuf {
    let out = dir.join("corpus.txt");
    let o = honad(&[
        "generate", "--users", "60", "--steps", "30", "--windows-per-regime", windows_per_regime,
        "--seed", "5", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn help_version_and_usage_errors() {
    assert_eq!(code(&["--help"]), 0);
    let v = honad(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains("graph format 1"));
    assert_eq!(code(&["pipeline", "--no-such-flag"]), 1);
    assert_eq!(code(&["generate", "--side", "5", "--out", "/dev/null"]), 1);
    assert_eq!(code(&["bench", "--max-orders", "0"]), 1);
}

#[test]
fn generate_one_window_per_regime() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_corpus(dir.path(), "1");
    let text = fs::read_to_string(&out).unwrap();
    let windows: std::collections::BTreeSet<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(' ').next().unwrap())
        .collect();
    assert_eq!(windows.len(), 11);
    let truth = fs::read_to_string(dir.path().join("corpus.txt.truth")).unwrap();
    assert_eq!(truth.lines().count(), 10);
    assert!(truth.starts_with("2 first\n"));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.txt");
    fs::write(&one, "1 a x y z\n1 b y z x\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(code(&["pipeline", "--input", p(&one), "--out", p(&out)]), 2);
    assert_eq!(code(&["pipeline", "--input", "/nonexistent/corpus", "--out", p(&out)]), 2);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 a x y\nnot-a-window b y\n").unwrap();
    let o = honad(&["mine", "--input", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn stages_agree_with_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), "2");
    let out = dir.path().join("run");
    let truth = dir.path().join("corpus.txt.truth");
    let o = honad(&[
        "pipeline", "--input", p(&corpus), "--truth", p(&truth), "--jobs", "2", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for m in ["weight", "mcs", "modality", "entropy", "spectral"] {
        for f in [format!("series_{m}.csv"), format!("report_{m}.csv"), format!("report_{m}.json")] {
            assert!(out.join(&f).exists(), "{f}");
        }
    }
    assert!(out.join("evaluation.csv").exists());
    let summary = fs::read_to_string(out.join("evaluation_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 6);
    assert_eq!(fs::read_dir(out.join("graphs")).unwrap().count(), 22);
    let header = fs::read_to_string(out.join("report_weight.csv")).unwrap();
    assert!(header.starts_with("t,d,mean,std,z,flagged,reason\n"));

    // mine + graph reproduce the pipeline's graph files
    let rules = dir.path().join("w3.rules");
    assert_eq!(code(&["mine", "--input", p(&corpus), "--window", "3", "--out", p(&rules)]), 0);
    let graph3 = dir.path().join("w3.graph");
    assert_eq!(code(&["graph", "--rules", p(&rules), "--out", p(&graph3)]), 0);
    assert_eq!(
        fs::read(&graph3).unwrap(),
        fs::read(out.join("graphs/window_00003.txt")).unwrap()
    );

    // distance between windows 2 and 3 is entry t = 3 of the series
    let g2 = out.join("graphs/window_00002.txt");
    let o = honad(&["distance", "--metric", "weight", p(&g2), p(&graph3)]);
    let d: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    let series = fs::read_to_string(out.join("series_weight.csv")).unwrap();
    let row = series.lines().find(|l| l.starts_with("3,")).unwrap();
    let expected: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(d, expected);

    // detect on the written series reproduces the report
    let report = dir.path().join("report.csv");
    let s = out.join("series_weight.csv");
    assert_eq!(code(&["detect", "--series", p(&s), "--out", p(&report)]), 0);
    assert_eq!(
        fs::read(&report).unwrap(),
        fs::read(out.join("report_weight.csv")).unwrap()
    );
}

#[test]
fn exhaustive_mine_needs_max_order() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), "1");
    assert_eq!(code(&["mine", "--input", p(&corpus), "--strategy", "exhaustive"]), 1);
    let lazy = honad(&["mine", "--input", p(&corpus)]);
    let exhaustive = honad(&["mine", "--input", p(&corpus), "--strategy", "exhaustive", "--max-order", "4"]);
    assert!(lazy.status.success() && exhaustive.status.success());
    assert_eq!(lazy.stdout, exhaustive.stdout);
}

#[test]
fn bench_reports_rows_and_dnf() {
    let o = honad(&["bench", "--planted-order", "3", "--max-orders", "1,3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("lazy,,ok,3,"));
    assert!(rows[2].starts_with("exhaustive,3,ok,3,"));
    assert!(rows[2].ends_with(",true"));

    let o = honad(&["bench", "--planted-order", "3", "--max-orders", "3", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("exhaustive,3,dnf,"));
}

#[test]
fn fon_equals_hon_without_higher_order_rules() {
    // two-entity trajectories leave nothing to extend
    let mut b = CorpusBuilder::new();
    for w in 1..=14 {
        for i in 0..(w % 4 + 3) {
            let pair = [["a", "b"], ["b", "c"], ["c", "a"], ["a", "c"]][(i + w) % 4];
            b.push(w, &format!("u{i}"), pair).unwrap();
        }
    }
    let corpus = b.build().unwrap();
    let run = |r| {
        analyze(
            &corpus,
            r,
            &MetricKind::ALL,
            &MinerConfig::default(),
            &DetectorConfig::default(),
            &SpectralParams::default(),
        )
        .unwrap()
    };
    let (fon, hon) = (run(Representation::Fon), run(Representation::Hon));
    assert_eq!(fon.graphs, hon.graphs);
    for (x, y) in fon.series.iter().zip(&hon.series) {
        assert_eq!(x.entries, y.entries);
    }
}
