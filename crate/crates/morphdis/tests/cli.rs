use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn morphdis(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphdis"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Small synthetic dataset written by the `synth` subcommand.
fn synth(dir: &Path) {
    let o = morphdis(
        &["synth", "--schema", "lev", "--budget", "3000", "--vocab", "400", "--out-dir", "data"],
        dir,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["train.jsonl", "tune.jsonl", "dev.jsonl", "test.jsonl", "analyzer.db"] {
        assert!(dir.join("data").join(f).exists(), "{f}");
    }
}

#[test]
fn usage_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&morphdis(&[], dir.path())), 1);
    assert_eq!(code(&morphdis(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&morphdis(&["eval", "accuracy", "--schema", "lev"], dir.path())), 1);
    let o = morphdis(&["corpus", "validate", "x.jsonl"], dir.path());
    assert_eq!(code(&o), 1, "missing --schema");
    let o = morphdis(&["corpus", "validate", "--schema", "xyz", "x.jsonl"], dir.path());
    assert_eq!(code(&o), 1, "unknown schema");
    assert_eq!(code(&morphdis(&["--help"], dir.path())), 0);
}

#[test]
fn data_errors_exit_with_2_and_cite_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = morphdis(&["corpus", "validate", "--schema", "lev", "missing.jsonl"], dir.path());
    assert_eq!(code(&o), 2);

    let good = json!({"id": "a", "tokens": [{"raw": "w", "analysis": {"diac": "wa", "lex": "w", "feats": {"pos": "noun"}}}]});
    let bad = json!({"id": "b", "tokens": [{"raw": "w", "analysis": {"diac": "wa", "lex": "w", "feats": {"pos": "nope"}}}]});
    fs::write(dir.path().join("c.jsonl"), format!("{good}\n{bad}\n")).unwrap();
    let o = morphdis(&["corpus", "validate", "--schema", "lev", "c.jsonl"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(":2"), "{}", stderr(&o));

    fs::write(dir.path().join("c.jsonl"), format!("{good}\n")).unwrap();
    let o = morphdis(&["corpus", "validate", "--schema", "lev", "c.jsonl"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("1 sentences, 1 tokens"));
}

#[test]
fn tag_disambiguate_and_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    let run = |args: &[&str]| {
        let o = morphdis(args, d);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        o
    };
    run(&["analyzer", "compile", "--schema", "lev", "--train", "data/train.jsonl", "--out", "compiled.db"]);
    let stats: Value = serde_json::from_str(&stdout(&run(&["analyzer", "stats", "--db", "data/analyzer.db"]))).unwrap();
    assert!(stats["forms"].as_u64().unwrap() > 0);
    assert_eq!(stats["variant"], "lev");

    run(&[
        "tagger", "train", "--schema", "lev", "--train", "data/train.jsonl", "--tune", "data/tune.jsonl",
        "--epochs", "2", "--out", "model.json",
    ]);
    run(&["tagger", "unigrams", "--schema", "lev", "--train", "data/train.jsonl", "--out", "uni.json"]);
    run(&["tagger", "predict", "--schema", "lev", "--model", "model.json", "--in", "data/dev.jsonl", "--out", "dev.dist.jsonl"]);
    run(&[
        "disambiguate", "--schema", "lev", "--distributions", "dev.dist.jsonl", "--analyzer", "data/analyzer.db",
        "--unigrams", "uni.json", "--in", "data/dev.jsonl", "--out", "dev.morph.jsonl", "--trace", "trace.jsonl",
    ]);
    let trace = fs::read_to_string(d.join("trace.jsonl")).unwrap();
    let first: Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(first["resolution"], "analyzer");
    assert!(!first["candidates"].as_array().unwrap().is_empty());

    let acc = |pred: &str| -> f64 {
        let o = run(&["eval", "accuracy", "--schema", "lev", "--pred", pred, "--gold", "data/dev.jsonl"]);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["accuracy"].as_f64().unwrap()
    };
    // the synthetic analyzer holds every gold analysis, so retagging only helps
    assert!(acc("dev.morph.jsonl") > 0.5);
    assert_eq!(acc("data/dev.jsonl"), 1.0);

    let o = run(&[
        "eval", "significance", "--schema", "lev", "--gold", "data/dev.jsonl", "--pred-a", "dev.morph.jsonl",
        "--pred-b", "data/dev.jsonl",
    ]);
    let m: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["b"], 0);

    let o = run(&[
        "eval", "errors", "--schema", "lev", "--pred", "dev.morph.jsonl", "--gold", "data/dev.jsonl",
    ]);
    let e: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(e["per_feature_error_counts"].is_object());

    let o = morphdis(
        &["eval", "accuracy", "--schema", "lev", "--pred", "data/test.jsonl", "--gold", "data/dev.jsonl"],
        d,
    );
    assert_eq!(code(&o), 2, "misaligned files are a data error");
}

#[test]
fn corpus_sampling_is_nested() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    let o = morphdis(
        &["corpus", "sample", "--schema", "lev", "--sizes", "200,400,800", "--out-dir", "s", "data/train.jsonl"],
        d,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ids = |n: usize| -> Vec<String> {
        fs::read_to_string(d.join(format!("s/sample-{n}.jsonl")))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str::<Value>(l).unwrap()["id"].as_str().unwrap().to_string())
            .collect()
    };
    let (a, b, c) = (ids(200), ids(400), ids(800));
    assert!(a.iter().all(|x| b.contains(x)));
    assert!(b.iter().all(|x| c.contains(x)));
    let o = morphdis(&["corpus", "sample", "--schema", "lev", "--sizes", "400,200", "data/train.jsonl"], d);
    assert_eq!(code(&o), 1);
}

fn write_spec(d: &Path, name: &str, strategy: &str) -> PathBuf {
    let mut spec = json!({
        "variant": "lev",
        "schema": "lev",
        "kind": "FACTORED",
        "use_analyzer": true,
        "sizes": [300, 600],
        "strategy": strategy,
        "epochs": 2,
        "paths": {
            "train": "data/train.jsonl",
            "tune": "data/tune.jsonl",
            "dev": "data/dev.jsonl",
            "test": "data/test.jsonl",
            "analyzer": "data/analyzer.db"
        }
    });
    if strategy != "SINGLE" {
        spec["high_resource"] = json!([
            {"variant": "egy", "schema": "egy", "train": "egy/train.jsonl"},
            {"variant": "msa", "schema": "msa", "train": "msa/train.jsonl"}
        ]);
    }
    let path = d.join(name);
    fs::write(&path, spec.to_string()).unwrap();
    path
}

fn run_dir(o: &Output) -> PathBuf {
    PathBuf::from(stdout(o).trim())
}

#[test]
fn experiment_runs_write_new_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    write_spec(d, "single.json", "SINGLE");
    let first = morphdis(&["experiment", "run", "--spec", "single.json", "--out-dir", "runs"], d);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let second = morphdis(&["experiment", "run", "--spec", "single.json", "--out-dir", "runs"], d);
    assert_eq!(code(&second), 0, "{}", stderr(&second));
    let (a, b) = (d.join(run_dir(&first)), d.join(run_dir(&second)));
    assert_ne!(a, b, "runs never overwrite each other");

    let reports = fs::read_to_string(a.join("reports.json")).unwrap();
    assert_eq!(reports, fs::read_to_string(b.join("reports.json")).unwrap());
    let v: Value = serde_json::from_str(&reports).unwrap();
    assert!(v["rows"].as_array().unwrap().len() >= 4);
    assert!(!v["curves"].as_array().unwrap().is_empty());
    // the synthetic analyzer covers every form, so nothing backs off
    let backoff = v["backoff"].as_array().unwrap();
    assert_eq!(backoff.len(), 4);
    assert!(backoff.iter().all(|b| b["backoff_tokens"] == 0));
    for f in ["spec.json", "report.txt", "models/300.json", "models/600.json", "predictions/600-dev-factored+morph.jsonl"] {
        assert!(a.join(f).exists(), "{f}");
    }
}

#[test]
fn continued_training_references_stage_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    for v in ["egy", "msa"] {
        let o = morphdis(
            &["synth", "--schema", v, "--budget", "2000", "--vocab", "300", "--seed", "7", "--out-dir", v],
            d,
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    write_spec(d, "continued.json", "CONTINUED");
    let o = morphdis(&["experiment", "run", "--spec", "continued.json", "--out-dir", "runs"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = d.join(run_dir(&o));
    assert!(dir.join("models/stage1.json").exists());
    let model: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("models/600.json")).unwrap()).unwrap();
    assert_eq!(model["meta"]["init"], "models/stage1.json");
    assert_eq!(model["schema_variant"], "lev-harmonized");
}

#[test]
fn invalid_spec_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_spec(d, "bad.json", "CONTINUED");
    let mut spec: Value = serde_json::from_str(&fs::read_to_string(d.join("bad.json")).unwrap()).unwrap();
    spec["high_resource"] = json!([]);
    fs::write(d.join("bad.json"), spec.to_string()).unwrap();
    let o = morphdis(&["experiment", "run", "--spec", "bad.json"], d);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let runs = fs::read_dir(d)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("run-"))
        .count();
    assert_eq!(runs, 0, "nothing is written for an invalid spec");
}

#[test]
fn harmonize_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for v in ["egy", "msa", "lev"] {
        let o = morphdis(
            &["synth", "--schema", v, "--budget", "1000", "--vocab", "200", "--out-dir", v],
            d,
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let o = morphdis(&["harmonize", "apply", "--in", "egy=egy/train.jsonl", "--out", "h.jsonl"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(d.join("h.jsonl")).unwrap();
    assert!(!text.contains("\"cas\"") && !text.contains("wa_conj"));

    let o = morphdis(
        &["harmonize", "stage", "--high", "egy=egy/train.jsonl", "--high", "msa=msa/train.jsonl", "--low", "lev=lev/train.jsonl", "--out-dir", "st"],
        d,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let schema: Value =
        serde_json::from_str(&fs::read_to_string(d.join("st/harmonized-schema.json")).unwrap()).unwrap();
    assert_eq!(schema["features"].as_array().unwrap().len(), 10);
    assert!(d.join("st/stage1.jsonl").exists() && d.join("st/stage2.jsonl").exists());

    let o = morphdis(&["harmonize", "merge", "--in", "egy=egy/train.jsonl", "--out", "m.jsonl"], d);
    assert_eq!(code(&o), 2, "merging a single corpus is rejected");
}
