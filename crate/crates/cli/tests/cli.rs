use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_satd-forge"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/java")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `n` labeled records over two projects; SATD comments mention "todo".
fn write_data(path: &Path, n: usize) {
    let mut text = String::new();
    for i in 0..n {
        let satd = i % 2 == 0;
        let var = format!("Name:v{}", i % 7);
        let words: Vec<String> = if satd {
            vec!["todo".into(), format!("w{}", i % 5), "later".into()]
        } else {
            vec![format!("w{}", i % 5), "return".into(), "valu".into()]
        };
        let rec = json!({
            "project": if i % 4 < 2 { "alpha" } else { "beta" },
            "path": format!("F{i}.java"),
            "span": [0, 10],
            "column": 1,
            "code_text": format!("if (v{}) {{}}", i % 7),
            "sbt_tokens": ["(", "IfStatement", "(", var, ")", var, ")", "IfStatement"],
            "comment_raw": format!("// {}", words.join(" ")),
            "comment_words": words,
            "label": if satd { "satd" } else { "non_satd" },
        });
        text.push_str(&rec.to_string());
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const FAST: [&str; 6] = ["--epochs", "2", "--latent-dim", "4", "--batch-size", "4"];

#[test]
fn mine_label_dataset_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    ok(&["mine", s(&fixtures()), "--out", s(&corpus)]);
    assert_eq!(fs::read_to_string(&corpus).unwrap().lines().count(), 20);
    let meta = read_json(&dir.path().join("corpus.jsonl.meta.json"));
    assert_eq!(meta["command"], "mine");
    assert_eq!(meta["details"]["records"], 20);
    assert_eq!(meta["details"]["diagnostics"].as_array().unwrap().len(), 1);

    ok(&["label", s(&corpus)]);
    let labels = read_json(&dir.path().join("corpus.jsonl.meta.json"));
    assert_eq!(labels["details"]["counts"]["satd"], 8);

    let data = dir.path().join("data.jsonl");
    ok(&[
        "dataset",
        s(&corpus),
        "--seed",
        "3",
        "--balance",
        "--out",
        s(&data),
    ]);
    assert_eq!(fs::read_to_string(&data).unwrap().lines().count(), 16);
    let meta = read_json(&dir.path().join("data.jsonl.meta.json"));
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["details"]["provenance"]["after_balance"], 16);
}

#[test]
fn dataset_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    ok(&["mine", s(&fixtures()), "--out", s(&corpus)]);
    let out = run(&[
        "dataset",
        s(&corpus),
        "--seed",
        "1",
        "--out",
        s(&dir.path().join("d.jsonl")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cv_reports_every_fold_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    write_data(&data, 20);
    let mut reports = Vec::new();
    for name in ["r1", "r2"] {
        let report = dir.path().join(name);
        let mut args = vec![
            "cv",
            s(&data),
            "--task",
            "detect-comment",
            "--k",
            "10",
            "--seed",
            "5",
            "--no-holdout",
            "--report",
            s(&report),
        ];
        args.extend(FAST);
        ok(&args);
        reports.push(report);
    }
    let folds = read_json(&reports[0].join("folds.json"));
    assert_eq!(folds["plan"].as_array().unwrap().len(), 10);
    for m in folds["models"].as_array().unwrap() {
        assert_eq!(m["folds"].as_array().unwrap().len(), 10);
    }
    let metrics = read_json(&reports[0].join("metrics.json"));
    assert_eq!(metrics["seed"], 5);
    assert_eq!(metrics["rows"].as_array().unwrap().len(), 3);
    assert_eq!(metrics["config"]["schema_version"], 1);
    for f in ["metrics.json", "folds.json", "table.txt"] {
        assert_eq!(
            fs::read(reports[0].join(f)).unwrap(),
            fs::read(reports[1].join(f)).unwrap(),
            "{f} differs between runs"
        );
    }
}

#[test]
fn cv_holds_out_the_tuning_set_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    write_data(&data, 40);
    let hp = dir.path().join("hp.json");
    fs::write(
        &hp,
        r#"{"schema_version": 1, "detectors": [{"kind": "mnb"}]}"#,
    )
    .unwrap();
    let report = dir.path().join("r");
    ok(&[
        "cv",
        s(&data),
        "--task",
        "detect-code",
        "--hp",
        s(&hp),
        "--k",
        "4",
        "--report",
        s(&report),
    ]);
    let metrics = read_json(&report.join("metrics.json"));
    assert_eq!(metrics["items"], 36);
    let table = fs::read_to_string(report.join("table.txt")).unwrap();
    assert!(table.starts_with("Model"));
}

#[test]
fn train_detect_and_generate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    write_data(&data, 24);

    let model = dir.path().join("mnb.ckpt");
    ok(&[
        "train",
        s(&data),
        "--task",
        "detect-comment",
        "--model",
        "mnb",
        "--out",
        s(&model),
    ]);
    assert!(dir.path().join("mnb.ckpt.meta.json").exists());
    let input = dir.path().join("comments.txt");
    fs::write(&input, "// TODO later\n\n// return value\n").unwrap();
    let out = ok(&[
        "detect",
        "--model",
        s(&model),
        "--input",
        s(&input),
        "--task",
        "detect-comment",
    ]);
    let lines: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].ends_with("\tsatd"), "{lines:?}");
    assert!(lines[1].ends_with("\tnon-satd"), "{lines:?}");

    let gen = dir.path().join("gen.ckpt");
    let mut args = vec![
        "train",
        s(&data),
        "--task",
        "generate",
        "--out",
        s(&gen),
        "--seed",
        "2",
    ];
    args.extend(FAST);
    ok(&args);
    let java = dir.path().join("ifs.java.txt");
    fs::write(&java, "if (v1) { x(); }\nif (a > b) return;\n").unwrap();
    let out = ok(&["generate", "--model", s(&gen), "--input", s(&java)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("// ")));
}

#[test]
fn pretrain_then_train_from_it() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    write_data(&data, 16);
    let lm = dir.path().join("lm.ckpt");
    let mut args = vec![
        "pretrain",
        s(&data),
        "--out",
        s(&lm),
        "--task",
        "detect-comment",
    ];
    args.extend(FAST);
    ok(&args);
    let meta = read_json(&dir.path().join("lm.ckpt.meta.json"));
    assert_eq!(meta["details"]["hp"]["latent_dim"], 4);

    let det = dir.path().join("det.ckpt");
    let mut args = vec![
        "train",
        s(&data),
        "--task",
        "detect-comment",
        "--out",
        s(&det),
        "--init",
        s(&lm),
        "--mode",
        "embedding-only",
    ];
    args.extend(FAST);
    ok(&args);
    let meta = read_json(&dir.path().join("det.ckpt.meta.json"));
    assert_eq!(meta["details"]["pretrained"]["mode"], "embedding_only");

    // A detector whose sizes differ from the language model cannot take its weights.
    let mut args = vec![
        "train",
        s(&data),
        "--task",
        "detect-comment",
        "--out",
        s(&det),
        "--init",
        s(&lm),
        "--epochs",
        "1",
        "--latent-dim",
        "6",
    ];
    args.extend(["--batch-size", "4"]);
    assert_eq!(code(&run(&args)), 2);
}

#[test]
fn tune_and_xproject() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    write_data(&data, 40);
    let grid = dir.path().join("grid.json");
    fs::write(
        &grid,
        r#"{"schema_version": 1, "detector": {"latent_dims": [4, 6], "layers": [1], "batch_sizes": [8], "poolings": ["max", "last"]}}"#,
    )
    .unwrap();
    let tuning = dir.path().join("tuning.json");
    ok(&[
        "tune",
        s(&data),
        "--task",
        "detect-code",
        "--grid",
        s(&grid),
        "--out",
        s(&tuning),
        "--epochs",
        "2",
        "--top",
        "1",
    ]);
    let t = read_json(&tuning);
    assert_eq!(t["rows"].as_array().unwrap().len(), 4);
    assert_eq!(t["selected"].as_array().unwrap().len(), 2);
    assert_eq!(t["tuning_size"], 4);

    // The tuning output feeds straight back in as a run config.
    let report = dir.path().join("x");
    ok(&[
        "xproject",
        s(&data),
        "--report",
        s(&report),
        "--hp",
        s(&tuning),
    ]);
    let folds = read_json(&report.join("folds.json"));
    let rounds = folds["rounds"].as_array().unwrap();
    assert_eq!(rounds.len(), 2);
    let metrics = read_json(&report.join("metrics.json"));
    assert_eq!(metrics["rows"].as_array().unwrap().len(), 4);
    assert!(fs::read_to_string(report.join("table.txt"))
        .unwrap()
        .contains("Average"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["mine", "x", "--out", "y", "--bogus"])), 1);
    assert_eq!(
        code(&run(&[
            "train", "d.jsonl", "--task", "generate", "--out", "m", "--mode", "end2end"
        ])),
        1
    );
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(code(&run(&["label", s(&missing)])), 2);
    assert_eq!(
        code(&run(&[
            "mine",
            s(&missing),
            "--out",
            s(&dir.path().join("c.jsonl"))
        ])),
        2
    );

    let data = dir.path().join("data.jsonl");
    write_data(&data, 20);
    let hp = dir.path().join("hp.json");
    fs::write(&hp, r#"{"schema_version": 2, "detectors": []}"#).unwrap();
    let report = s(&dir.path().join("r")).to_string();
    let cv = |hp: &Path| {
        run(&[
            "cv",
            s(&data),
            "--task",
            "detect-code",
            "--hp",
            s(hp),
            "--report",
            &report,
        ])
    };
    assert_eq!(code(&cv(&hp)), 2);
    fs::write(
        &hp,
        r#"{"schema_version": 1, "detectors": [{"kind": "dl", "latent": 3}]}"#,
    )
    .unwrap();
    assert_eq!(code(&cv(&hp)), 2);
    assert_eq!(
        code(&run(&[
            "cv",
            s(&data),
            "--task",
            "detect-code",
            "--k",
            "50",
            "--report",
            &report
        ])),
        1
    );

    let out = bin()
        .env("SATD_THREADS", "zero")
        .args(["label", s(&data)])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);

    // An absurd learning rate drives the weights to infinity.
    let m = dir.path().join("m.ckpt");
    let out = run(&[
        "train",
        s(&data),
        "--task",
        "detect-code",
        "--out",
        s(&m),
        "--lr",
        "1e300",
        "--epochs",
        "5",
        "--latent-dim",
        "4",
        "--batch-size",
        "4",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    write_data(&data, 20);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let m = dir.path().join(format!("m{threads}.ckpt"));
        let mut args = vec!["train", s(&data), "--task", "detect-code", "--out", s(&m)];
        args.extend(FAST);
        let out = bin()
            .env("SATD_THREADS", threads)
            .args(&args)
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(fs::read(&m).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
