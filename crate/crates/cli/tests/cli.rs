use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_acceptkit"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn acceptkit")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const POS: [&str; 4] = ["good", "great", "fine", "nice"];
const NEG: [&str; 4] = ["bad", "awful", "poor", "dull"];
const NOUNS: [&str; 5] = ["movie", "book", "meal", "song", "game"];

/// Writes a corpus where every third translation flips the sentiment word.
fn fixture(dir: &Path, n: usize) -> (PathBuf, PathBuf, PathBuf) {
    let mut pairs = String::new();
    let mut mt = String::new();
    for i in 0..n {
        let noun = NOUNS[i % NOUNS.len()];
        let (w, other) = if i % 2 == 0 {
            (POS[i % 4], NEG[(i / 2) % 4])
        } else {
            (NEG[i % 4], POS[(i / 2) % 4])
        };
        pairs.push_str(&format!("das {noun} ist w{}\tthe {noun} is {w}\n", i % 4));
        if i % 3 == 0 {
            mt.push_str(&format!("the {noun} is {other}\n"));
        } else {
            mt.push_str(&format!("the {noun} is {w}\n"));
        }
    }
    let mut lex = String::new();
    for w in POS {
        lex.push_str(&format!("{w}\t1\n"));
    }
    for w in NEG {
        lex.push_str(&format!("{w}\t-1\n"));
    }
    let p = dir.join("pairs.tsv");
    let m = dir.join("trans.txt");
    let l = dir.join("lex.tsv");
    fs::write(&p, pairs).unwrap();
    fs::write(&m, mt).unwrap();
    fs::write(&l, lex).unwrap();
    (p, m, l)
}

fn annotate(dir: &Path) -> serde_json::Value {
    fixture(dir, 60);
    let out = ok(
        dir,
        &[
            "annotate",
            "--pairs",
            "pairs.tsv",
            "--mt",
            "trans.txt",
            "--task",
            "sentiment",
            "--lexicon",
            "lex.tsv",
            "--merges",
            "20",
            "--out",
            "data.jsonl",
        ],
    );
    serde_json::from_str(&out).unwrap()
}

#[test]
fn annotate_writes_labels_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = annotate(tmp.path());
    assert_eq!(summary["instances"], 60);
    assert_eq!(summary["unacceptable"], 20);
    assert_eq!(summary["acceptable"], 40);
    let text = fs::read_to_string(tmp.path().join("data.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 61);
    let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["seed"], 0);
    assert!(tmp.path().join("data.jsonl.meta.json").exists());
}

#[test]
fn missing_required_flag_exits_one_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["eval", "--pred", "p.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--gold"));
}

#[test]
fn unknown_subcommand_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["eval", "--pred", "nope.tsv", "--gold", "nope.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_data_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("p.tsv"), "1\t0.9\nmaybe\t0.1\n").unwrap();
    fs::write(tmp.path().join("g.tsv"), "f1\tlabel\n").unwrap();
    let out = run(tmp.path(), &["eval", "--pred", "p.tsv", "--gold", "g.tsv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_formats() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for f in [
        "parallel corpus",
        "dataset",
        "birnn model",
        "svm model",
        "predictions",
        "features",
    ] {
        assert!(text.contains(f), "help lacks {f}");
    }
}

fn confusion_accuracy(report: &serde_json::Value) -> f64 {
    let c = &report["confusion"];
    let get = |k: &str| c[k].as_u64().unwrap() as f64;
    (get("tp") + get("tn")) / (get("tp") + get("tn") + get("fp") + get("fn"))
}

#[test]
fn birnn_round_trip_and_eval_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    annotate(d);
    ok(
        d,
        &[
            "--seed",
            "3",
            "split",
            "--data",
            "data.jsonl",
            "--dev",
            "10",
            "--test",
            "10",
            "--out-dir",
            "split",
        ],
    );
    let birnn = [
        "--seed",
        "3",
        "train-birnn",
        "--train",
        "split/train.jsonl",
        "--dev",
        "split/dev.jsonl",
        "--embed-dim",
        "4",
        "--hidden-dim",
        "4",
        "--proj-dim",
        "4",
        "--penult-dim",
        "4",
        "--batch-size",
        "8",
        "--max-epochs",
        "3",
        "--log",
        "log.jsonl",
    ];
    ok(d, &[&birnn[..], &["--out", "a.bin"]].concat());
    ok(d, &[&birnn[..], &["--out", "b.bin"]].concat());
    assert_eq!(fs::read(d.join("a.bin")).unwrap(), fs::read(d.join("b.bin")).unwrap());
    assert_eq!(fs::read_to_string(d.join("log.jsonl")).unwrap().lines().count(), 3);

    ok(
        d,
        &[
            "predict",
            "--model",
            "a.bin",
            "--input",
            "split/test.jsonl",
            "--out",
            "preds.tsv",
        ],
    );
    assert_eq!(fs::read_to_string(d.join("preds.tsv")).unwrap().lines().count(), 10);
    let report: serde_json::Value =
        serde_json::from_str(&ok(d, &["eval", "--pred", "preds.tsv", "--gold", "split/test.jsonl"])).unwrap();
    assert_eq!(report["instances"], 10);
    let acc = report["accuracy"].as_f64().unwrap();
    assert!((acc - confusion_accuracy(&report)).abs() < 1e-12);
}

#[test]
fn biquest_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    annotate(d);
    ok(
        d,
        &[
            "features",
            "--pairs",
            "pairs.tsv",
            "--data",
            "data.jsonl",
            "--ibm1-iterations",
            "2",
            "--out",
            "f.tsv",
        ],
    );
    let feats = fs::read_to_string(d.join("f.tsv")).unwrap();
    assert_eq!(feats.lines().count(), 61);
    assert_eq!(feats.lines().next().unwrap().split('\t').count(), 18);
    ok(d, &["train-biquest", "--features", "f.tsv", "--out", "m.svm"]);
    ok(
        d,
        &["predict", "--model", "m.svm", "--input", "f.tsv", "--out", "p.tsv"],
    );
    let report: serde_json::Value =
        serde_json::from_str(&ok(d, &["eval", "--pred", "p.tsv", "--gold", "f.tsv"])).unwrap();
    assert_eq!(report["instances"], 60);
    assert!((report["accuracy"].as_f64().unwrap() - confusion_accuracy(&report)).abs() < 1e-12);
}

#[test]
fn pipeline_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fixture(d, 80);
    let base = [
        "--seed",
        "7",
        "pipeline",
        "--pairs",
        "pairs.tsv",
        "--adapter",
        "noise",
        "--drop",
        "0.3",
        "--task",
        "sentiment",
        "--lexicon",
        "lex.tsv",
        "--merges",
        "20",
        "--dev",
        "10",
        "--test",
        "20",
        "--embed-dim",
        "3",
        "--hidden-dim",
        "3",
        "--proj-dim",
        "3",
        "--penult-dim",
        "3",
        "--batch-size",
        "8",
        "--max-epochs",
        "2",
        "--ibm1-iterations",
        "2",
    ];
    let args = [&base[..], &["--out-dir", "run"]].concat();
    let files = [
        "report.json",
        "birnn.bin",
        "biquest.svm",
        "birnn.predictions.tsv",
        "biquest.predictions.tsv",
    ];
    let r1 = ok(d, &args);
    let first: Vec<Vec<u8>> = files.iter().map(|f| fs::read(d.join("run").join(f)).unwrap()).collect();
    let r2 = ok(d, &args);
    assert_eq!(r1, r2);
    for (f, bytes) in files.iter().zip(&first) {
        assert_eq!(&fs::read(d.join("run").join(f)).unwrap(), bytes, "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&r1).unwrap();
    assert_eq!(report["seed"], 7);
    assert!(report["birnn"]["detection"].is_object());
    // sentiment has three labels, so no flip simulation
    assert!(report["birnn"]["pipeline"].is_null());
}
