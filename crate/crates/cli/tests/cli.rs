//! End-to-end tests of the `logsphere` binary: subcommand wiring, exit
//! codes, determinism guarantees, and the JSON contracts on stdout.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_logsphere"));
    cmd.env_remove("LOGSPHERE_OUT");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn logsphere")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

/// Writes a small corpus spec and renders it; returns the corpus directory.
fn gen_corpus(root: &Path, train_anomaly_rate: f64) -> PathBuf {
    let spec = root.join("spec_in.json");
    std::fs::write(
        &spec,
        format!(
            r#"{{
              "n_train": 200, "n_test": 80, "n_auxiliary": 150,
              "templates_train": 6, "templates_unseen": 2,
              "templates_anomaly": 4, "templates_auxiliary": 6,
              "anomaly_rate": 0.2, "unseen_rate": 0.1,
              "train_anomaly_rate": {train_anomaly_rate}, "seed": 33
            }}"#
        ),
    )
    .unwrap();
    let dir = root.join("corpus");
    let out = run(&[
        "gen-synthetic",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    dir
}

/// Trains a deliberately tiny model on `corpus` and returns the run directory.
fn train_tiny(root: &Path, corpus: &Path, name: &str, seed: &str) -> PathBuf {
    let out_dir = root.join(name);
    let out = run(&[
        "train",
        "--train",
        corpus.join("train.log").to_str().unwrap(),
        "--test",
        corpus.join("test.log").to_str().unwrap(),
        "--aux",
        corpus.join("auxiliary.log").to_str().unwrap(),
        "--m",
        "20",
        "--embed-dim",
        "8",
        "--num-layers",
        "1",
        "--max-epochs",
        "2",
        "--batch-size",
        "32",
        "--seed",
        seed,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    out_dir
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert_ok(&out);
    let text = stdout_str(&out);
    for name in [
        "train",
        "finetune",
        "score",
        "eval",
        "sweep",
        "baseline-pca",
        "pca-embed",
        "ablate-aux",
        "ablate-labels",
        "gen-synthetic",
        "export-embeddings",
    ] {
        assert!(text.contains(name), "--help is missing `{name}`");
    }
}

#[test]
fn gen_synthetic_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = gen_corpus(tmp.path(), 0.0);
    let b_root = tmp.path().join("again");
    std::fs::create_dir(&b_root).unwrap();
    std::fs::copy(tmp.path().join("spec_in.json"), b_root.join("spec_in.json")).unwrap();
    let b = gen_corpus(&b_root, 0.0);
    for file in ["train.log", "test.log", "target.log", "auxiliary.log", "spec.json"] {
        let left = std::fs::read(a.join(file)).unwrap();
        let right = std::fs::read(b.join(file)).unwrap();
        assert_eq!(left, right, "{file} differs between identical-spec runs");
    }
}

#[test]
fn train_writes_bundle_report_and_config_echo() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let run_dir = train_tiny(tmp.path(), &corpus, "run", "9");
    for file in ["model.bundle", "train_report.jsonl", "config.json"] {
        assert!(run_dir.join(file).is_file(), "missing {file}");
    }
    let echo: Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("config.json")).unwrap())
            .unwrap();
    assert_eq!(echo["command"], "train");
    assert_eq!(echo["config"]["embed_dim"], 8);
    assert_eq!(echo["config"]["seed"], 9);
    assert_eq!(echo["m"], 20);
    // The epoch log is one JSON object per line, closed by a summary row.
    let report = std::fs::read_to_string(run_dir.join("train_report.jsonl")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 3, "expected one line per epoch plus a summary");
    for (i, line) in lines[..2].iter().enumerate() {
        let row: Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["epoch"], (i + 1) as u64);
        assert!(row["loss"].is_f64());
    }
    let summary: Value = serde_json::from_str(lines[2]).unwrap();
    assert_eq!(summary["stopped_epoch"], 2);
    assert_eq!(summary["params_checksum"].as_str().unwrap().len(), 64);
    assert_eq!(summary["collapse_warning"], false);
}

#[test]
fn score_emits_json_lines_and_eval_reports_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let run_dir = train_tiny(tmp.path(), &corpus, "run", "9");
    let bundle = run_dir.join("model.bundle");

    let out = run(&[
        "score",
        "--model",
        bundle.to_str().unwrap(),
        "--input",
        corpus.join("test.log").to_str().unwrap(),
        "--format",
        "dash",
    ]);
    assert_ok(&out);
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 80, "one verdict per input line");
    for (i, line) in lines.iter().enumerate() {
        let v: Value = serde_json::from_str(line).expect("line JSON");
        assert_eq!(v["seq_index"], (i + 1) as u64);
        assert!(v["score"].as_f64().unwrap().is_finite());
        assert!(v["is_anomaly"].is_boolean());
        assert!(v["threshold"].is_f64());
    }

    let out = run(&[
        "eval",
        "--model",
        bundle.to_str().unwrap(),
        "--input",
        corpus.join("test.log").to_str().unwrap(),
        "--format",
        "dash",
    ]);
    assert_ok(&out);
    let report: Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    for key in ["precision", "recall", "f1", "accuracy", "threshold"] {
        assert!(report[key].is_f64(), "eval output missing {key}");
    }
    let counts = ["true_pos", "false_pos", "true_neg", "false_neg"]
        .iter()
        .map(|k| report[k].as_u64().unwrap())
        .sum::<u64>();
    assert_eq!(counts, 80);

    let out = run(&[
        "sweep",
        "--model",
        bundle.to_str().unwrap(),
        "--input",
        corpus.join("test.log").to_str().unwrap(),
        "--format",
        "dash",
    ]);
    assert_ok(&out);
    let sweep: Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(sweep["best_threshold"].is_f64());
    assert!(sweep["best_f1"].as_f64().unwrap() >= 0.0);
    assert!(sweep["points"].as_array().unwrap().len() > 1);
}

#[test]
fn identical_train_runs_write_identical_bundles() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let a = train_tiny(tmp.path(), &corpus, "a", "17");
    let b = train_tiny(tmp.path(), &corpus, "b", "17");
    let left = std::fs::read(a.join("model.bundle")).unwrap();
    let right = std::fs::read(b.join("model.bundle")).unwrap();
    assert_eq!(left, right, "same inputs + seed must give identical bundles");

    let c = train_tiny(tmp.path(), &corpus, "c", "18");
    let other = std::fs::read(c.join("model.bundle")).unwrap();
    assert_ne!(left, other, "a different seed should change the bundle");
}

#[test]
fn flags_override_config_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"embed_dim": 8, "max_epochs": 1, "num_layers": 1}"#).unwrap();
    let out_dir = tmp.path().join("run");
    let out = run(&[
        "train",
        "--train",
        corpus.join("train.log").to_str().unwrap(),
        "--test",
        corpus.join("test.log").to_str().unwrap(),
        "--aux",
        corpus.join("auxiliary.log").to_str().unwrap(),
        "--m",
        "20",
        "--config",
        cfg.to_str().unwrap(),
        "--embed-dim",
        "4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let echo: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("config.json")).unwrap())
            .unwrap();
    assert_eq!(echo["config"]["embed_dim"], 4, "flag must beat config file");
    assert_eq!(echo["config"]["max_epochs"], 1, "file must beat default");
    assert_eq!(echo["config"]["num_layers"], 1);
}

#[test]
fn finetune_updates_an_existing_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let run_dir = train_tiny(tmp.path(), &corpus, "run", "9");
    let out_dir = tmp.path().join("tuned");
    let out = run(&[
        "finetune",
        "--model",
        run_dir.join("model.bundle").to_str().unwrap(),
        "--labels",
        corpus.join("test.log").to_str().unwrap(),
        "--epochs",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert!(out_dir.join("model.bundle").is_file());
    assert!(out_dir.join("finetune_report.jsonl").is_file());
    let before = std::fs::read(run_dir.join("model.bundle")).unwrap();
    let after = std::fs::read(out_dir.join("model.bundle")).unwrap();
    assert_ne!(before, after, "fine-tuning should move the weights");
}

#[test]
fn env_var_supplies_default_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let out_dir = tmp.path().join("from_env");
    let out = bin()
        .env("LOGSPHERE_OUT", &out_dir)
        .args([
            "train",
            "--train",
            corpus.join("train.log").to_str().unwrap(),
            "--test",
            corpus.join("test.log").to_str().unwrap(),
            "--aux",
            corpus.join("auxiliary.log").to_str().unwrap(),
            "--m",
            "20",
            "--embed-dim",
            "8",
            "--num-layers",
            "1",
            "--max-epochs",
            "1",
            "--batch-size",
            "32",
        ])
        .output()
        .unwrap();
    assert_ok(&out);
    assert!(out_dir.join("model.bundle").is_file());
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);

    let unknown = run(&["score", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(2), "unknown flag");

    let missing = run(&[
        "score",
        "--model",
        tmp.path().join("absent.bundle").to_str().unwrap(),
        "--input",
        corpus.join("test.log").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(2), "missing model file");
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent.bundle"));

    let conflict = run(&[
        "train",
        "--target",
        corpus.join("target.log").to_str().unwrap(),
        "--train",
        corpus.join("train.log").to_str().unwrap(),
        "--test",
        corpus.join("test.log").to_str().unwrap(),
        "--aux",
        corpus.join("auxiliary.log").to_str().unwrap(),
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(conflict.status.code(), Some(2), "--target conflicts with --train");

    let bad_cfg = tmp.path().join("bad.json");
    std::fs::write(&bad_cfg, r#"{"embed_dim": "blue"}"#).unwrap();
    let cfg_err = run(&[
        "train",
        "--train",
        corpus.join("train.log").to_str().unwrap(),
        "--test",
        corpus.join("test.log").to_str().unwrap(),
        "--aux",
        corpus.join("auxiliary.log").to_str().unwrap(),
        "--config",
        bad_cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("y").to_str().unwrap(),
    ]);
    assert_eq!(cfg_err.status.code(), Some(2), "malformed config file");

    let unknown_key = tmp.path().join("extra.json");
    std::fs::write(&unknown_key, r#"{"embed_dims": 8}"#).unwrap();
    let key_err = run(&[
        "train",
        "--train",
        corpus.join("train.log").to_str().unwrap(),
        "--test",
        corpus.join("test.log").to_str().unwrap(),
        "--aux",
        corpus.join("auxiliary.log").to_str().unwrap(),
        "--config",
        unknown_key.to_str().unwrap(),
        "--out",
        tmp.path().join("z").to_str().unwrap(),
    ]);
    assert_eq!(key_err.status.code(), Some(2), "unknown config key");
}

#[test]
fn runtime_errors_exit_with_1() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    // 150 auxiliary messages cannot supply m = 99999 samples.
    let out = run(&[
        "train",
        "--train",
        corpus.join("train.log").to_str().unwrap(),
        "--test",
        corpus.join("test.log").to_str().unwrap(),
        "--aux",
        corpus.join("auxiliary.log").to_str().unwrap(),
        "--m",
        "99999",
        "--embed-dim",
        "8",
        "--num-layers",
        "1",
        "--max-epochs",
        "1",
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "auxiliary pool overdraw");
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn score_threshold_flag_overrides_bundle_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let run_dir = train_tiny(tmp.path(), &corpus, "run", "9");
    let out = run(&[
        "score",
        "--model",
        run_dir.join("model.bundle").to_str().unwrap(),
        "--input",
        corpus.join("test.log").to_str().unwrap(),
        "--format",
        "dash",
        "--threshold",
        "1e18",
    ]);
    assert_ok(&out);
    for line in stdout_str(&out).lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["is_anomaly"], false);
        assert_eq!(v["threshold"].as_f64().unwrap(), 1e18);
    }
}

#[test]
fn baseline_and_ablation_commands_produce_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.1);
    let train = corpus.join("train.log");
    let test = corpus.join("test.log");
    let aux = corpus.join("auxiliary.log");

    let out = run(&[
        "baseline-pca",
        "--train",
        train.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
        "--format",
        "dash",
        "--variance-fraction",
        "0.99",
    ]);
    assert_ok(&out);
    let report: Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(report["f1"].as_f64().unwrap() >= 0.0);

    let aux_dir = tmp.path().join("aux_ab");
    let out = run(&[
        "ablate-aux",
        "--train",
        train.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
        "--aux",
        aux.to_str().unwrap(),
        "--format",
        "dash",
        "--m-values",
        "0,10",
        "--embed-dim",
        "8",
        "--num-layers",
        "1",
        "--max-epochs",
        "1",
        "--batch-size",
        "32",
        "--out",
        aux_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let rows: Value = serde_json::from_str(
        &std::fs::read_to_string(aux_dir.join("aux_ablation.json")).unwrap(),
    )
    .unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["m"], 0);
    assert_eq!(rows[0]["collapse_warning"], true);
    assert_eq!(rows[1]["collapse_warning"], false);

    let lab_dir = tmp.path().join("lab_ab");
    let out = run(&[
        "ablate-labels",
        "--train",
        train.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
        "--aux",
        aux.to_str().unwrap(),
        "--format",
        "dash",
        "--m",
        "10",
        "--fractions",
        "0,0.5",
        "--finetune-epochs",
        "1",
        "--embed-dim",
        "8",
        "--num-layers",
        "1",
        "--max-epochs",
        "1",
        "--batch-size",
        "32",
        "--out",
        lab_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let rows: Value = serde_json::from_str(
        &std::fs::read_to_string(lab_dir.join("label_ablation.json")).unwrap(),
    )
    .unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["injected"], 0);
    // 200 train records at 10% contamination hold 20 anomalies; half get labels.
    assert_eq!(rows[1]["injected"], 10);
}

#[test]
fn export_embeddings_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let run_dir = train_tiny(tmp.path(), &corpus, "run", "9");
    let out_dir = tmp.path().join("emb");
    let out = run(&[
        "export-embeddings",
        "--model",
        run_dir.join("model.bundle").to_str().unwrap(),
        "--input",
        corpus.join("test.log").to_str().unwrap(),
        "--format",
        "dash",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let csv = std::fs::read_to_string(out_dir.join("embeddings.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 81, "header plus one row per message");
    assert_eq!(lines[0], "message_id,label,e0,e1,e2,e3,e4,e5,e6,e7,score");
    assert!(lines.iter().any(|l| l.contains(",anomaly,")));
}

#[test]
fn target_split_mode_matches_presplit_files() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    // target.log is train.log followed by test.log; a 200/280 split fraction
    // reproduces the same windows, so training must give the same bundle.
    let frac = 200.0 / 280.0;
    let split_dir = tmp.path().join("split");
    let out = run(&[
        "train",
        "--target",
        corpus.join("target.log").to_str().unwrap(),
        "--train-frac",
        &frac.to_string(),
        "--aux",
        corpus.join("auxiliary.log").to_str().unwrap(),
        "--m",
        "20",
        "--embed-dim",
        "8",
        "--num-layers",
        "1",
        "--max-epochs",
        "2",
        "--batch-size",
        "32",
        "--seed",
        "9",
        "--out",
        split_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let presplit = train_tiny(tmp.path(), &corpus, "presplit", "9");
    let a = std::fs::read(split_dir.join("model.bundle")).unwrap();
    let b = std::fs::read(presplit.join("model.bundle")).unwrap();
    assert_eq!(a, b, "both input modes must see the same train window");
}

#[test]
fn score_exits_cleanly_when_stdout_closes_early() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(tmp.path(), 0.0);
    let run_dir = train_tiny(tmp.path(), &corpus, "run", "7");
    // Long enough that the writer overflows the pipe buffer after the reader
    // is gone, forcing the broken-pipe path rather than racing past it.
    let window = std::fs::read_to_string(corpus.join("test.log")).unwrap();
    let big = tmp.path().join("big.log");
    std::fs::write(&big, window.repeat(40)).unwrap();

    let mut child = bin()
        .args([
            "score",
            "--model",
            run_dir.join("model.bundle").to_str().unwrap(),
            "--input",
            big.to_str().unwrap(),
            "--format",
            "dash",
        ])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take()); // hang up like `| head` does
    let status = child.wait().unwrap();
    let mut err = String::new();
    use std::io::Read as _;
    child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
    assert!(status.success(), "closed stdout must not fail: {err}");
    assert!(err.is_empty(), "no error output expected, got: {err}");
}
