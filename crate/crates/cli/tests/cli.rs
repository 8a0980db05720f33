use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use sumstate::corpus::load_corpus;
use sumstate::eval::EvalReport;
use sumstate::model::{write_checkpoint, ModelConfig, ModelParams, Vocab};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy20.jsonl")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumstate"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn sumstate")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ids(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["id"]
                .as_str()
                .unwrap()
                .to_owned()
        })
        .collect()
}

#[test]
fn oracle_writes_labels_aligned_by_id() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let out = ok(
        dir.path(),
        &["oracle", "--corpus", f.to_str().unwrap(), "--out", "labels.jsonl"],
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean score"));
    let docs = load_corpus(&f, true).unwrap().documents;
    let want: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    assert_eq!(ids(&dir.path().join("labels.jsonl")), want);
}

#[test]
fn missing_corpus_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["oracle", "--corpus", "no-such-corpus.jsonl", "--out", "l.jsonl"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-corpus.jsonl"));
}

#[test]
fn input_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.jsonl"), "{\"id\": \"a\"\n").unwrap();
    let out = run(
        dir.path(),
        &["oracle", "--corpus", "bad.jsonl", "--out", "l.jsonl"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"));

    let f = fixture();
    let out = run(dir.path(), &["oracle", "--corpus", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--out"));

    let out = run(
        dir.path(),
        &[
            "oracle",
            "--corpus",
            f.to_str().unwrap(),
            "--out",
            "l",
            "--beam",
            "wide",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    fs::write(dir.path().join("run.conf"), "colour = blue\n").unwrap();
    let out = run(dir.path(), &["oracle", "--config", "run.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"));

    let out = run(dir.path(), &["oracle", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compressive_without_spans_notes_heuristic_spans() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let out = ok(
        dir.path(),
        &[
            "oracle",
            "--corpus",
            f.to_str().unwrap(),
            "--objective",
            "compressive",
            "--out",
            "c.jsonl",
        ],
    );
    assert!(
        stderr(&out).contains("spans=heuristic for 20 of 20"),
        "{}",
        stderr(&out)
    );

    let out = ok(
        dir.path(),
        &["oracle", "--corpus", f.to_str().unwrap(), "--out", "e.jsonl"],
    );
    assert!(!stderr(&out).contains("spans=heuristic"));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    fs::write(
        dir.path().join("run.conf"),
        format!(
            "# oracle run\ncorpus = {}\nout = from-config.jsonl\nmax_len = 1\n",
            f.display()
        ),
    )
    .unwrap();
    ok(dir.path(), &["oracle", "--config", "run.conf"]);
    ok(
        dir.path(),
        &[
            "oracle",
            "--config",
            "run.conf",
            "--out",
            "from-flag.jsonl",
            "--max-len",
            "4",
        ],
    );
    let count = |name: &str| -> Vec<usize> {
        fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                v["z"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .filter(|b| b.as_u64() == Some(1))
                    .count()
            })
            .collect()
    };
    assert!(count("from-config.jsonl").iter().all(|&n| n <= 1));
    assert!(count("from-flag.jsonl").iter().any(|&n| n > 1));
}

#[test]
fn help_lists_every_flag_with_its_default() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["oracle", "train", "summarize", "evaluate"] {
        let out = ok(dir.path(), &[sub, "--help"]);
        let text = String::from_utf8_lossy(&out.stdout).into_owned();
        let flags: Vec<&str> = text
            .lines()
            .map(str::trim_start)
            .filter(|l| l.starts_with("--") && !l.starts_with("--help"))
            .collect();
        assert!(flags.len() >= 5, "{sub}: {text}");
        for line in flags {
            assert!(line.contains("[default: "), "{sub}: `{line}` has no default");
        }
    }
}

#[test]
fn rouge_of_a_file_against_itself_is_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("a.txt"),
        "the storm hit on friday .\nofficials said two died .\n",
    )
    .unwrap();
    let out = ok(dir.path(), &["rouge", "a.txt", "a.txt"]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "R1 1.000000  R2 1.000000  RL 1.000000\n"
    );
}

#[test]
fn zero_epochs_checkpoint_equals_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let fs_ = f.to_str().unwrap();
    ok(dir.path(), &["oracle", "--corpus", fs_, "--out", "l.jsonl"]);
    ok(
        dir.path(),
        &[
            "train",
            "--corpus",
            fs_,
            "--labels",
            "l.jsonl",
            "--epochs",
            "0",
            "--seed",
            "5",
            "--embed-dim",
            "8",
            "--hidden-dim",
            "8",
            "--out",
            "m.json",
        ],
    );
    let docs = load_corpus(&f, false).unwrap().documents;
    let cfg = ModelConfig {
        embed_dim: 8,
        hidden_dim: 8,
        epochs: 0,
        seed: 5,
        ..ModelConfig::default()
    };
    let mut want = Vec::new();
    write_checkpoint(&ModelParams::init(cfg, Vocab::build(&docs)), &mut want).unwrap();
    want.push(b'\n');
    assert_eq!(fs::read(dir.path().join("m.json")).unwrap(), want);
}

#[test]
fn summarize_then_evaluate_covers_every_document_once() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let fs_ = f.to_str().unwrap();
    ok(dir.path(), &["oracle", "--corpus", fs_, "--out", "l.jsonl"]);
    ok(
        dir.path(),
        &[
            "summarize",
            "--corpus",
            fs_,
            "--method",
            "labels",
            "--labels",
            "l.jsonl",
            "--out",
            "s.jsonl",
        ],
    );
    ok(
        dir.path(),
        &[
            "evaluate",
            "--corpus",
            fs_,
            "--summaries",
            "s.jsonl",
            "--out",
            "r.json",
        ],
    );
    let report: EvalReport = serde_json::from_slice(&fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    let docs = load_corpus(&f, false).unwrap().documents;
    let got: Vec<&str> = report.documents.iter().map(|d| d.id.as_str()).collect();
    let want: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(got, want);
}

#[test]
fn end_to_end_on_the_fixture() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let fs_ = f.to_str().unwrap();
    ok(
        dir.path(),
        &["oracle", "--corpus", fs_, "--max-len", "4", "--out", "l.jsonl"],
    );
    ok(
        dir.path(),
        &[
            "train",
            "--corpus",
            fs_,
            "--labels",
            "l.jsonl",
            "--epochs",
            "20",
            "--validation",
            fs_,
            "--validation-labels",
            "l.jsonl",
            "--log",
            "log.jsonl",
            "--out",
            "m.json",
        ],
    );
    ok(
        dir.path(),
        &[
            "summarize",
            "--corpus",
            fs_,
            "--checkpoint",
            "m.json",
            "--out",
            "s.jsonl",
        ],
    );
    ok(
        dir.path(),
        &[
            "summarize",
            "--corpus",
            fs_,
            "--method",
            "lead",
            "--out",
            "lead.jsonl",
        ],
    );
    ok(
        dir.path(),
        &[
            "evaluate",
            "--corpus",
            fs_,
            "--summaries",
            "lead.jsonl",
            "--name",
            "lead",
            "--out",
            "lead.json",
        ],
    );
    let out = ok(
        dir.path(),
        &[
            "evaluate",
            "--corpus",
            fs_,
            "--summaries",
            "s.jsonl",
            "--name",
            "model",
            "--out",
            "r.json",
            "--compare",
            "lead=lead.json",
            "--csv",
            "t.csv",
        ],
    );
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(table.contains("model") && table.contains("lead"));
    assert_eq!(
        fs::read_to_string(dir.path().join("t.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );

    let epochs: Vec<serde_json::Value> = fs::read_to_string(dir.path().join("log.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["kind"] == "epoch")
        .collect();
    assert_eq!(epochs.len(), 20);
    let first = epochs[0]["mean_loss"].as_f64().unwrap();
    let last = epochs[19]["mean_loss"].as_f64().unwrap();
    assert!(last < first, "final loss {last} not below first {first}");
    assert!(epochs[19]["validation_accuracy"].as_f64().is_some());
    assert!(start.elapsed() < Duration::from_secs(300));
}
