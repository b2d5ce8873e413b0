//! Drives the installed binary end to end: artifact determinism, exit
//! codes, and the error stream contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_texclass"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary should spawn");
    assert!(
        out.status.success(),
        "`texclass {}` failed\nstdout: {}\nstderr: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary should spawn");
    assert!(
        !out.status.success(),
        "`texclass {}` unexpectedly succeeded",
        args.join(" ")
    );
    out
}

struct Workspace {
    dir: PathBuf,
}

impl Workspace {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("texclass-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Workspace {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.dir);
    }
}

/// synth -> extract -> split -> train both models, small enough to be quick.
fn prepare_pipeline(ws: &Workspace) {
    run_ok(&[
        "synth",
        "--out-dir",
        &ws.path("images"),
        "--count",
        "10",
        "--size",
        "32",
        "--seed",
        "7",
    ]);
    run_ok(&[
        "extract",
        "--images",
        &ws.path("images"),
        "--block-size",
        "8",
        "--out",
        &ws.path("features.csv"),
    ]);
    run_ok(&[
        "split",
        "--features",
        &ws.path("features.csv"),
        "--fraction",
        "0.8",
        "--seed",
        "3",
        "--train-out",
        &ws.path("train.csv"),
        "--test-out",
        &ws.path("test.csv"),
    ]);
    run_ok(&[
        "train-efunn",
        "--features",
        &ws.path("train.csv"),
        "--out",
        &ws.path("model.efunn"),
        "--event-log",
        &ws.path("events.csv"),
    ]);
    run_ok(&[
        "train-mlp",
        "--features",
        &ws.path("train.csv"),
        "--hidden",
        "12",
        "--epochs",
        "40",
        "--seed",
        "2",
        "--out",
        &ws.path("model.mlp"),
    ]);
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn pipeline_produces_reports_and_rules() {
    let ws = Workspace::new("pipeline");
    prepare_pipeline(&ws);

    for model in ["model.efunn", "model.mlp"] {
        let out = run_ok(&[
            "evaluate",
            "--model",
            &ws.path(model),
            "--features",
            &ws.path("test.csv"),
            "--out",
            &ws.path("report.csv"),
        ]);
        let text = String::from_utf8_lossy(&out.stdout).into_owned();
        assert!(text.contains("class"), "missing table header:\n{text}");
        for family in ["brick", "metal", "rural"] {
            assert!(text.contains(family), "missing {family} row:\n{text}");
        }
        assert!(text.contains("reliability"), "missing reliability line:\n{text}");
        let report = read(&ws.dir.join("report.csv"));
        assert!(report.lines().any(|l| l.starts_with("reliability,")));
    }

    // a trained model always yields at least one rule
    let out = run_ok(&["rules", "--model", &ws.path("model.efunn")]);
    let rules = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(rules.lines().count() >= 1);
    assert!(rules.lines().all(|l| l.starts_with("if ") && l.contains(" then class ")));

    // classify emits one prediction per row
    let out = run_ok(&[
        "classify",
        "--model",
        &ws.path("model.efunn"),
        "--features",
        &ws.path("test.csv"),
    ]);
    let predictions = String::from_utf8_lossy(&out.stdout).into_owned();
    let test_rows = read(&ws.dir.join("test.csv")).lines().count() - 1;
    assert_eq!(predictions.lines().count(), test_rows + 1);
    assert!(predictions.starts_with("source,label,predicted\n"));

    // the event log mirrors the training set row for row
    let events = read(&ws.dir.join("events.csv"));
    let train_rows = read(&ws.dir.join("train.csv")).lines().count() - 1;
    assert_eq!(events.lines().count(), train_rows + 1);
    assert!(events.lines().skip(1).all(|l| l.contains(",created,") || l.contains(",updated,")));
}

#[test]
fn artifacts_are_byte_reproducible() {
    let a = Workspace::new("repro-a");
    let b = Workspace::new("repro-b");
    prepare_pipeline(&a);
    prepare_pipeline(&b);

    for name in ["features.csv", "train.csv", "test.csv", "model.efunn", "model.mlp"] {
        assert_eq!(
            read(&a.dir.join(name)),
            read(&b.dir.join(name)),
            "{name} differs between identical runs"
        );
    }
    let image = "images/brick_003.pgm";
    assert_eq!(
        std::fs::read(a.dir.join(image)).unwrap(),
        std::fs::read(b.dir.join(image)).unwrap(),
        "generated images differ between identical runs"
    );
}

#[test]
fn prune_and_aggregate_write_new_models() {
    let ws = Workspace::new("transforms");
    prepare_pipeline(&ws);

    let out = run_ok(&[
        "prune",
        "--model",
        &ws.path("model.efunn"),
        "--level",
        "0",
        "--out",
        &ws.path("pruned.efunn"),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("pruned 0 nodes"));
    assert_eq!(read(&ws.dir.join("pruned.efunn")), read(&ws.dir.join("model.efunn")));

    run_ok(&[
        "aggregate",
        "--model",
        &ws.path("model.efunn"),
        "--thr1",
        "0.4",
        "--thr2",
        "0.2",
        "--out",
        &ws.path("agg.efunn"),
    ]);
    // the merged model still evaluates
    run_ok(&["evaluate", "--model", &ws.path("agg.efunn"), "--features", &ws.path("test.csv")]);
}

#[test]
fn failures_use_nonzero_exits_and_stderr() {
    let ws = Workspace::new("errors");

    // unknown flag
    let out = run_err(&["synth", "--bogus-flag", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    // missing file
    let out = run_err(&["evaluate", "--model", &ws.path("nope.model"), "--features", &ws.path("x.csv")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    // malformed feature csv
    std::fs::write(ws.dir.join("bad.csv"), "label,b0_c0\nx,notanumber\n").unwrap();
    let out = run_err(&[
        "train-efunn",
        "--features",
        &ws.path("bad.csv"),
        "--out",
        &ws.path("m.efunn"),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // rules on an mlp file
    prepare_pipeline(&ws);
    let out = run_err(&["rules", "--model", &ws.path("model.mlp")]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not an evolving-model file"));

    // evaluating features whose labels the model does not know
    let features = read(&ws.dir.join("test.csv")).replace("brick", "granite");
    std::fs::write(ws.dir.join("other.csv"), features).unwrap();
    let out = run_err(&[
        "evaluate",
        "--model",
        &ws.path("model.efunn"),
        "--features",
        &ws.path("other.csv"),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("granite"));

    // corrupted model file
    let model = read(&ws.dir.join("model.efunn"));
    std::fs::write(ws.dir.join("broken.efunn"), model.replace("nodes ", "nodes x")).unwrap();
    let out = run_err(&[
        "classify",
        "--model",
        &ws.path("broken.efunn"),
        "--features",
        &ws.path("test.csv"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extract_accepts_custom_masks_and_rejects_bad_ones() {
    let ws = Workspace::new("mask");
    run_ok(&[
        "synth",
        "--out-dir",
        &ws.path("images"),
        "--count",
        "2",
        "--size",
        "16",
        "--seed",
        "5",
    ]);
    run_ok(&[
        "extract",
        "--images",
        &ws.path("images"),
        "--mask",
        "0:0,0:1,1:0,1:1,2:0,0:2,3:0,0:3,2:2",
        "--out",
        &ws.path("f.csv"),
    ]);
    let header = read(&ws.dir.join("f.csv")).lines().next().unwrap().to_string();
    assert!(header.starts_with("label,b0_c0"));

    let out = run_err(&[
        "extract",
        "--images",
        &ws.path("images"),
        "--mask",
        "0:1,0:0,1:0,1:1,2:0,0:2,3:0,0:3,2:2",
        "--out",
        &ws.path("g.csv"),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0,0)"));
}
