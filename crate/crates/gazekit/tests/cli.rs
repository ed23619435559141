//! The command-line tool end to end, through the built binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use gazekit::save_corpus;
use gazekit_core::corpus::synthetic::{human_like, SyntheticSpec};
use gazekit_core::evaluation::{EvaluationReport, MeanStd, PerFeature};
use serde_json::Value;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

/// Runs the binary and checks that it fails exactly when it reports an error.
fn gazekit(args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_gazekit")).args(args).output().unwrap();
    let o = Outcome {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    };
    let diagnosed = o.stderr.contains("error");
    assert_eq!(o.code != 0, diagnosed, "exit {} with stderr {:?}", o.code, o.stderr);
    o
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn small_corpus(dir: &Path, name: &str, n_sentences: usize, seed: u64) -> String {
    let p = dir.join(format!("{name}.jsonl"));
    save_corpus(
        &human_like(
            name,
            &SyntheticSpec {
                n_sentences,
                seed,
                ..SyntheticSpec::default()
            },
        ),
        &p,
    )
    .unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(gazekit(&["--help"]).code, 0);
    assert_eq!(gazekit(&["--version"]).code, 0);
    assert!(gazekit(&["analyze", "--help"]).stdout.contains("--kind"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(gazekit(&[]).code, 1);
    assert_eq!(gazekit(&["frobnicate"]).code, 1);
    assert_eq!(gazekit(&["stats"]).code, 1);
    assert_eq!(
        gazekit(&["validate", &fixture("mary.jsonl"), "--format", "dundee-raw"]).code,
        1
    );
    assert_eq!(gazekit(&["train", "--corpus", &fixture("mary.jsonl")]).code, 1);
    assert_eq!(
        gazekit(&[
            "train",
            "--corpus",
            &fixture("mary.jsonl"),
            "--out",
            "x",
            "--train-fraction",
            "1.5"
        ])
        .code,
        1
    );
}

#[test]
fn clean_fixture_validates() {
    let o = gazekit(&["validate", &fixture("synthetic-en.jsonl")]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "0 violation(s)\n");
    let o = gazekit(&["validate", &fixture("mary.jsonl"), "--json"]);
    assert_eq!(
        serde_json::from_str::<Value>(&o.stdout).unwrap()["violations"],
        Value::Array(vec![])
    );
}

#[test]
fn defects_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(
        &bad,
        concat!(
            r#"{"document_id":"d","sentence_id":"s","language":"en","tokens":["a","b"],"trials":[{"subject_id":"p","fixations":[{"token_index":5,"duration_ms":100,"order":0},{"token_index":0,"duration_ms":-3,"order":1}]}]}"#,
            "\n"
        ),
    )
    .unwrap();
    let o = gazekit(&["validate", s(&bad)]);
    assert_eq!(o.code, 2);
    assert!(o.stdout.ends_with("2 violation(s)\n"), "{}", o.stdout);
    assert_eq!(gazekit(&["stats", s(&bad)]).code, 2);

    let malformed = dir.path().join("malformed.jsonl");
    fs::write(
        &malformed,
        r#"{"document_id":"d","sentence_id":"s","language":"en","tokens":"ab","trials":[]}"#,
    )
    .unwrap();
    let o = gazekit(&["validate", s(&malformed)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains(":1: tokens:"), "{}", o.stderr);
}

#[test]
fn missing_input_is_a_runtime_failure() {
    assert_eq!(gazekit(&["stats", "/nonexistent/corpus.jsonl"]).code, 3);
}

#[test]
fn stats_json() {
    let o = gazekit(&["stats", &fixture("mary.jsonl"), "--json"]);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(
        (
            v["n_sentences"].as_u64(),
            v["n_tokens"].as_u64(),
            v["n_subjects"].as_u64()
        ),
        (Some(1), Some(5), Some(1))
    );
    assert_eq!(v["word_length_max"].as_u64(), Some(6));
}

#[test]
fn extract_writes_splits_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("features");
    assert_eq!(
        gazekit(&["extract", &fixture("synthetic-en.jsonl"), "--out", s(&out)]).code,
        0
    );
    let lines = |f: &str| fs::read_to_string(out.join(f)).unwrap().lines().count() - 1;
    assert_eq!(
        lines("train.tsv") + lines("val.tsv") + lines("test.tsv"),
        lines("features.tsv")
    );
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["command"], "extract");
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn validate_only_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"corpus": {:?}, "stages": ["validate"]}}"#,
            fixture("mary.jsonl")
        ),
    )
    .unwrap();
    let out = dir.path().join("run");
    assert_eq!(gazekit(&["--config", s(&cfg), "--out", s(&out)]).code, 0);
    assert_eq!(
        read_json(&out.join("validation.json"))["violations"],
        Value::Array(vec![])
    );
    assert_eq!(
        read_json(&out.join("manifest.json"))["outputs"],
        serde_json::json!(["validation.json"])
    );
}

#[test]
fn failing_stage_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"corpus": {:?}, "stages": ["stats", "report"]}}"#,
            fixture("mary.jsonl")
        ),
    )
    .unwrap();
    let o = gazekit(&["--config", s(&cfg), "--out", s(&dir.path().join("run"))]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("stage report"), "{}", o.stderr);
    // the stats stage ran before the failure and its output stays
    assert!(dir.path().join("run/stats.json").exists());
}

#[test]
fn trained_run_rescores_to_its_own_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), "small", 40, 3);
    let run = dir.path().join("run");
    let quick = ["--max-epochs", "3", "--patience", "1"];
    let mut args = vec!["train", "--corpus", &corpus, "--seed", "12", "--out", s(&run)];
    args.extend(quick);
    assert_eq!(gazekit(&args).code, 0);
    for f in [
        "config.json",
        "standardizer.json",
        "history.csv",
        "model.params",
        "metrics.json",
        "manifest.json",
    ] {
        assert!(run.join(f).exists(), "{f}");
    }
    let trained = read_json(&run.join("metrics.json"))["accuracy"].as_f64().unwrap();

    let eval = dir.path().join("eval");
    assert_eq!(gazekit(&["evaluate", "--runs", s(&run), "--out", s(&eval)]).code, 0);
    let report = read_json(&eval.join("report.json"));
    assert_eq!(report["overall"]["mean"].as_f64().unwrap(), trained);
    assert_eq!(report["n_seeds"], 1);
    let keys: Vec<&str> = report["per_feature"]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(keys, ["nFix", "FFD", "FPD", "TRT", "MFD", "fProp", "nRefix", "reProp"]);

    let wordlen = dir.path().join("wordlen.csv");
    assert_eq!(
        gazekit(&["analyze", "--kind", "wordlen", "--run", s(&run), "--out", s(&wordlen)]).code,
        0
    );
    let text = fs::read_to_string(&wordlen).unwrap();
    assert!(text.starts_with("bin,series,mean,count\n"));
    for series in ["true", "predicted", "pretrained"] {
        assert!(text.contains(&format!(",{series},")), "{series}");
    }
    let readability = dir.path().join("readability.csv");
    assert_eq!(
        gazekit(&[
            "analyze",
            "--kind",
            "readability",
            "--run",
            s(&run),
            "--out",
            s(&readability)
        ])
        .code,
        0
    );
}

#[test]
fn frozen_training_keeps_initial_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), "small", 20, 4);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = gazekit(&[
            "train",
            "--corpus",
            &corpus,
            "--seed",
            "79",
            "--no-finetune",
            "--out",
            s(out),
        ]);
        assert_eq!(o.code, 0);
    }
    assert_eq!(
        fs::read(a.join("model.params")).unwrap(),
        fs::read(b.join("model.params")).unwrap()
    );
    assert_eq!(fs::read_to_string(a.join("history.csv")).unwrap().lines().count(), 2);
}

#[test]
fn pos_analysis_reads_tags() {
    let dir = tempfile::tempdir().unwrap();
    let c = human_like(
        "tagged",
        &SyntheticSpec {
            n_sentences: 30,
            ..SyntheticSpec::default()
        },
    );
    let corpus = dir.path().join("tagged.jsonl");
    save_corpus(&c, &corpus).unwrap();
    let mut tsv = String::from("sentence_id\ttoken_index\ttag\n");
    for sent in &c.sentences {
        for t in &sent.tokens {
            let tag = if t.char_length <= 3 { "SHORT" } else { "LONG" };
            tsv += &format!("{}\t{}\t{tag}\n", sent.sentence_id, t.index);
        }
    }
    let tags = dir.path().join("tags.tsv");
    fs::write(&tags, tsv).unwrap();
    let out = dir.path().join("pos.csv");
    let o = gazekit(&[
        "analyze",
        "--kind",
        "pos",
        "--corpus",
        s(&corpus),
        "--tags",
        s(&tags),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.code, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");
    let missing = gazekit(&["analyze", "--kind", "pos", "--corpus", s(&corpus), "--out", s(&out)]);
    assert_eq!(missing.code, 1);
}

fn write_report(dir: &Path, model: &str, dataset: &str, mean: f64) {
    fs::create_dir_all(dir).unwrap();
    let r = EvaluationReport {
        model: model.into(),
        dataset: dataset.into(),
        overall: MeanStd { mean, std: 0.1 },
        per_feature: PerFeature([MeanStd { mean, std: 0.1 }; 8]),
        n_seeds: 5,
    };
    fs::write(dir.join("report.json"), serde_json::to_string(&r).unwrap()).unwrap();
}

#[test]
fn report_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    write_report(&a, "bert-en", "geco", 93.742);
    let o = gazekit(&["report", s(&a)]);
    assert_eq!(o.stdout, "model            geco\nbert-en  93.74 (0.10)\n");

    write_report(&b, "xlm-100", "zuco", 90.0);
    let out = dir.path().join("summary");
    let o = gazekit(&["report", s(&a), s(&b), "--out", s(&out)]);
    assert_eq!(o.code, 0);
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv, "model,geco,zuco\nbert-en,93.74 (0.10),\nxlm-100,,90.00 (0.10)\n");
    assert!(out.join("manifest.json").exists());

    let bad = dir.path().join("bad");
    fs::create_dir_all(&bad).unwrap();
    let mut v = read_json(&a.join("report.json"));
    let pf = v["per_feature"].as_object().unwrap().clone();
    v["per_feature"] = Value::Object(pf.into_iter().rev().collect());
    fs::write(bad.join("report.json"), v.to_string()).unwrap();
    assert_eq!(gazekit(&["report", s(&a), s(&bad)]).code, 2);
}

#[test]
fn cross_eval_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_corpus(dir.path(), "a", 30, 5);
    let b = small_corpus(dir.path(), "b", 30, 6);
    let out = dir.path().join("cross");
    let o = gazekit(&[
        "cross-eval",
        "--corpus",
        &format!("a={a}"),
        "--corpus",
        &format!("b={b}"),
        "--seed",
        "12",
        "--max-epochs",
        "2",
        "--patience",
        "1",
        "--out",
        s(&out),
        "--json",
    ]);
    assert_eq!(o.code, 0);
    let m: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(m["deltas"][0][0], 0.0);
    assert_eq!(m["deltas"][1][1], 0.0);
    let csv = fs::read_to_string(out.join("cross_matrix.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(out.join("runs/a/seed-12/manifest.json").exists());
    assert_eq!(
        gazekit(&["cross-eval", "--corpus", &format!("a={a}"), "--out", s(&out)]).code,
        1
    );
}

#[test]
fn ablation_points() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), "small", 40, 8);
    let out = dir.path().join("ablation");
    let o = gazekit(&[
        "ablate",
        "--corpus",
        &corpus,
        "--fractions",
        "0.5,1.0",
        "--seed",
        "12",
        "--max-epochs",
        "2",
        "--patience",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.code, 0);
    let csv = fs::read_to_string(out.join("ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "{csv}");
    assert!(csv.starts_with("series,fraction,n_sentences,mean,std\n"));
}

/// The bundled experiment, run twice with one seed.
#[test]
fn pipeline_beats_baseline_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}"))).collect();
    for out in &runs {
        let o = gazekit(&["--config", &fixture("experiment.json"), "--seed", "12", "--out", s(out)]);
        assert_eq!(o.code, 0, "{}", o.stderr);
    }
    let model = read_json(&runs[0].join("report.json"))["overall"]["mean"]
        .as_f64()
        .unwrap();
    let baseline = read_json(&runs[0].join("baseline.json"))["overall"]["mean"]
        .as_f64()
        .unwrap();
    assert!(model > baseline, "{model} vs {baseline}");

    for f in [
        "per_feature.csv",
        "summary/summary.csv",
        "summary/per_feature.csv",
        "analysis/wordlen.csv",
        "analysis/readability.csv",
        "runs/seed-12/history.csv",
        "runs/seed-12/metrics.json",
        "features/features.tsv",
    ] {
        assert_eq!(
            fs::read(runs[0].join(f)).unwrap(),
            fs::read(runs[1].join(f)).unwrap(),
            "{f}"
        );
    }
    let m = read_json(&runs[0].join("manifest.json"));
    assert_eq!(m["seeds"], serde_json::json!([12]));
    assert!(m["outputs"].as_array().unwrap().iter().any(|o| o == "report.json"));
}
