use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use itemset_cli::{run, tsv};
use itemset_core::model::ModelFile;
use itemset_core::ranking::by_interestingness;
use itemset_core::ItemsetModel;

fn imine(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("imine").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small database with two strongly correlated groups plus noise.
fn sample_db(dir: &Path) -> PathBuf {
    let mut text = String::new();
    for k in 0..300 {
        let mut t: Vec<u32> = Vec::new();
        if k % 3 == 0 {
            t.extend([10, 20, 30]);
        }
        if k % 5 == 0 {
            t.extend([7, 8]);
        }
        if k % 7 == 0 {
            t.push(40 + (k % 4));
        }
        let line: Vec<String> = t.iter().map(u32::to_string).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    let path = dir.join("db.dat");
    fs::write(&path, text).unwrap();
    path
}

fn read_rows(path: &Path) -> Vec<(usize, itemset_core::ranking::RankedItemset)> {
    tsv::read_ranked(fs::read(path).unwrap().as_slice()).unwrap()
}

#[test]
fn mine_writes_ranked_tsv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let db = sample_db(dir.path());
    let out = dir.path().join("out.tsv");
    let (code, stdout, stderr) = imine(&[
        "mine",
        "--input",
        s(&db),
        "--output",
        s(&out),
        "--threads",
        "2",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.is_empty());
    let rows = read_rows(&out);
    let ranks: Vec<usize> = rows.iter().map(|r| r.0).collect();
    assert_eq!(ranks, (1..=rows.len()).collect::<Vec<_>>());
    for w in rows.windows(2) {
        assert_ne!(
            by_interestingness(&w[0].1, &w[1].1),
            std::cmp::Ordering::Greater
        );
    }
    let sets: Vec<Vec<u32>> = rows.iter().map(|r| r.1.itemset.raw_ids()).collect();
    assert!(sets.contains(&vec![10, 20, 30]));
    assert!(sets.contains(&vec![7, 8]));

    let report: itemset_cli::RunReport = serde_json::from_str(stderr.trim()).unwrap();
    assert!(report.accepted + report.rejected <= report.proposed);
    assert!(report.non_singletons <= report.itemsets);
    assert_eq!(report.itemsets, rows.len());
    assert_eq!(report.transactions, 300);
    assert_eq!(report.config.threads, 2);
}

#[test]
fn model_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let db = sample_db(dir.path());
    let out = dir.path().join("out.tsv");
    let model_path = dir.path().join("model.json");
    let (code, _, _) = imine(&[
        "mine",
        "--input",
        s(&db),
        "--output",
        s(&out),
        "--model-out",
        s(&model_path),
    ]);
    assert_eq!(code, 0);
    let file = ModelFile::read(&model_path).unwrap();
    let model = ItemsetModel::from_file(&file).unwrap();
    assert_eq!(model.to_file(file.universe), file);

    let again = dir.path().join("again.json");
    model.to_file(file.universe).write(&again).unwrap();
    let reloaded = ItemsetModel::from_file(&ModelFile::read(&again).unwrap()).unwrap();
    assert_eq!(reloaded.entries(), model.entries());

    // every ranked row is a model entry with the same probability and support
    for (_, row) in read_rows(&out) {
        let entry = model.get(&row.itemset).unwrap();
        assert_eq!(entry.pi, row.pi);
        assert_eq!(entry.support, row.support);
    }
}

#[test]
fn zero_iterations_give_singletons_only() {
    let dir = tempfile::tempdir().unwrap();
    let db = sample_db(dir.path());
    let out = dir.path().join("out.tsv");
    let (code, _, _) = imine(&[
        "mine",
        "--input",
        s(&db),
        "--iterations",
        "0",
        "--output",
        s(&out),
    ]);
    assert_eq!(code, 0);
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.1.itemset.is_singleton()));
    // 10 appears in 100 of 300 transactions
    let ten = rows.iter().find(|r| r.1.itemset.raw_ids() == [10]).unwrap();
    assert_eq!(ten.1.support, 100);
    assert_eq!(ten.1.pi, 100.0 / 300.0);
}

#[test]
fn filters_and_sort_order() {
    let dir = tempfile::tempdir().unwrap();
    let db = sample_db(dir.path());
    let (code, stdout, _) = imine(&[
        "mine",
        "--input",
        s(&db),
        "--no-singletons",
        "--sort",
        "probability",
    ]);
    assert_eq!(code, 0);
    let rows = tsv::read_ranked(stdout.as_bytes()).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| !r.1.itemset.is_singleton()));
    assert_eq!(rows[0].0, 1);
    for w in rows.windows(2) {
        assert!(w[0].1.pi >= w[1].1.pi);
    }
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.dat");
    fs::write(&empty, "").unwrap();
    let (code, _, err) = imine(&["mine", "--input", s(&empty)]);
    assert_eq!(code, 2);
    assert!(err.contains("empty database"), "{err}");

    let bad = dir.path().join("bad.dat");
    fs::write(&bad, "1 2\n3 x\n").unwrap();
    let (code, _, err) = imine(&["mine", "--input", s(&bad)]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");

    let (code, _, _) = imine(&["mine", "--input", s(&dir.path().join("missing.dat"))]);
    assert_eq!(code, 2);

    let model = dir.path().join("model.json");
    fs::write(&model, "{not json").unwrap();
    let (code, _, _) = imine(&[
        "synth",
        "--model",
        s(&model),
        "--transactions",
        "3",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(imine(&["mine"]).0, 1);
    assert_eq!(imine(&["frobnicate"]).0, 1);
    assert_eq!(
        imine(&[
            "synth",
            "--model",
            "m.json",
            "--transactions",
            "0",
            "--seed",
            "1"
        ])
        .0,
        1
    );
    assert_eq!(imine(&["mine", "--input", "x.dat", "--threads", "0"]).0, 1);
    assert_eq!(
        imine(&["eval", "iid", "--mined", "x.tsv", "--top", "1"]).0,
        1
    );
    let (code, out, _) = imine(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("mine"));
}

fn write_truth(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("truth.json");
    fs::write(&path, json).unwrap();
    path
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let truth = write_truth(
        dir.path(),
        r#"{"itemsets":[{"items":[1,2],"pi":0.3},{"items":[3],"pi":0.5},{"items":[2,4,5],"pi":0.1}],"universe":6}"#,
    );
    let gen = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let (code, _, _) = imine(&[
            "synth",
            "--model",
            s(&truth),
            "--transactions",
            "500",
            "--seed",
            seed,
            "--output",
            s(&out),
        ]);
        assert_eq!(code, 0);
        fs::read(out).unwrap()
    };
    let a = gen("42", "a.dat");
    assert_eq!(a, gen("42", "b.dat"));
    assert_ne!(a, gen("43", "c.dat"));
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 500);
}

#[test]
fn zero_probability_model_gives_blank_lines() {
    let dir = tempfile::tempdir().unwrap();
    let truth = write_truth(
        dir.path(),
        r#"{"itemsets":[{"items":[1,2],"pi":0.0}],"universe":3}"#,
    );
    let (code, out, _) = imine(&[
        "synth",
        "--model",
        s(&truth),
        "--transactions",
        "4",
        "--seed",
        "0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "\n\n\n\n");
}

#[test]
fn eval_pr_on_truth_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let truth = write_truth(
        dir.path(),
        r#"{"itemsets":[{"items":[1,2],"pi":0.3},{"items":[3,4],"pi":0.2},{"items":[5],"pi":0.1}],"universe":6}"#,
    );
    let mined = dir.path().join("mined.tsv");
    fs::write(
        &mined,
        format!(
            "{}\n1\t1\t0.3\t3\t3\t1 2\n2\t1\t0.2\t2\t2\t3 4\n3\t1\t0.1\t1\t1\t5\n",
            tsv::HEADER
        ),
    )
    .unwrap();
    let (code, out, _) = imine(&["eval", "pr", "--mined", s(&mined), "--truth", s(&truth)]);
    assert_eq!(code, 0);
    let (points, interpolated) = out.split_once("\n\n").unwrap();
    assert_eq!(points.lines().count(), 4);
    assert!(points.ends_with("3\t1\t1"));
    let block: Vec<&str> = interpolated.lines().skip(1).collect();
    assert_eq!(block.len(), 11);
    assert!(block.iter().all(|l| l.ends_with("\t1")));

    let (code, out, _) = imine(&[
        "eval",
        "pr",
        "--mined",
        s(&mined),
        "--truth",
        s(&truth),
        "--no-singletons",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.split_once("\n\n").unwrap().0.lines().count(), 3);
}

#[test]
fn eval_iid_row() {
    let dir = tempfile::tempdir().unwrap();
    let mined = dir.path().join("mined.tsv");
    fs::write(
        &mined,
        format!(
            "{}\n1\t1\t0.3\t3\t3\t1 2\n2\t1\t0.2\t2\t2\t1 3\n3\t1\t0.1\t1\t1\t9\n4\t1\t0.1\t1\t1\t4 5 6\n",
            tsv::HEADER
        ),
    )
    .unwrap();
    let (code, out, _) = imine(&[
        "eval",
        "iid",
        "--mined",
        s(&mined),
        "--top",
        "50",
        "--no-singletons",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "requested\tused\tiid\n50\t3\t3\n");
}

#[test]
fn eval_scaling_reports_each_size() {
    let dir = tempfile::tempdir().unwrap();
    let truth = write_truth(
        dir.path(),
        r#"{"itemsets":[{"items":[1,2],"pi":0.3},{"items":[3],"pi":0.5}],"universe":4}"#,
    );
    let (code, out, _) = imine(&[
        "eval",
        "scaling",
        "--model",
        s(&truth),
        "--sizes",
        "50,100",
        "--iterations",
        "5",
        "--threads",
        "1",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("50\t"));
    assert!(lines[2].starts_with("100\t"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_imine");
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.dat");
    fs::write(&empty, "\n").unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = status(&["mine", "--input", s(&empty)]);
    // a single blank line is one empty transaction, which mines fine
    assert_eq!(out.status.code(), Some(0));
    fs::write(&empty, "").unwrap();
    let out = status(&["mine", "--input", s(&empty)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty database"));
    assert_eq!(status(&["mine", "--bogus"]).status.code(), Some(1));
    assert_eq!(status(&["--version"]).status.code(), Some(0));
}
