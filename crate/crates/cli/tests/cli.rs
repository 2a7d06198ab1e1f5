use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gtuple(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtuple"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tuple_counts_and_listing() {
    let out = gtuple(&["tuples", "--m", "10", "--s", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "810");

    let out = gtuple(&["tuples", "--m", "2", "--s", "2", "--list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines,
        ["0\t0-1\tFist > Flat Hand", "1\t1-0\tFlat Hand > Fist"]
    );

    let out = gtuple(&["tuples", "--m", "1", "--s", "3"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("error"));
}

#[test]
fn decode_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let one_hot = |n: usize| {
        (0..6)
            .map(|i| if i == n { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(",")
    };
    let good = dir.path().join("good.csv");
    let rows: Vec<_> = [5, 5, 1, 1, 3, 3].iter().map(|&n| one_hot(n)).collect();
    fs::write(&good, rows.join("\n") + "\n").unwrap();
    let out = gtuple(&["decode", path(&good)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "pi=[5,1,3] score=5.600 k=2");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0.5,0.5\n0.4,0.4\n").unwrap();
    let out = gtuple(&["decode", path(&bad)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("bad.csv:2:"), "{}", stderr(&out));

    let short = dir.path().join("short.csv");
    fs::write(&short, "0.5,0.5\n0.5,0.5\n").unwrap();
    let out = gtuple(&["decode", path(&short), "--k", "2"]);
    assert!(!out.status.success());
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = gtuple(&[
            "simulate",
            "--m",
            "2",
            "--s",
            "2",
            "--per-class",
            "1",
            "--sigma",
            "0.5",
            "--seed",
            "9",
            "--out",
            path(dir.path()),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let files = |d: &Path| {
        let mut names: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        names
    };
    assert_eq!(
        files(a.path()),
        ["manifest.jsonl", "stream_00000.csv", "stream_00001.csv"]
    );
    for name in files(a.path()) {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn clean_test_set_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = gtuple(&["simulate", "--per-class", "2", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = dir.path().join("manifest.jsonl");
    let text = fs::read_to_string(&manifest).unwrap();
    assert_eq!(text.lines().count(), 1620);

    let report = dir.path().join("report.json");
    let out = gtuple(&["run", path(&manifest), "--out", path(&report)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).trim_end().ends_with("100.00"),
        "{}",
        stdout(&out)
    );
    let json = fs::read_to_string(&report).unwrap();
    let report = gesture_tuples::EvalReport::from_json(&json).unwrap();
    assert_eq!(
        (report.n_samples, report.err_det, report.err_tup),
        (1620, 0, 0)
    );

    let line = text
        .lines()
        .find(|l| l.contains(r#""truth":"5-1-3""#))
        .unwrap();
    let entry: serde_json::Value = serde_json::from_str(line).unwrap();
    let stream = dir.path().join(entry["path"].as_str().unwrap());
    let out = gtuple(&["run", path(&stream)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let kinds: Vec<_> = stdout(&out)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(kinds, ["SoG", "EoG", "TupleRecognized"]);
    assert!(stdout(&out).contains("tuple=5-1-3"));
}

#[test]
fn missing_stream_is_a_detector_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gtuple(&[
        "simulate",
        "--m",
        "3",
        "--s",
        "2",
        "--per-class",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    fs::remove_file(dir.path().join("stream_00002.csv")).unwrap();
    let manifest = dir.path().join("manifest.jsonl");
    let out = gtuple(&["run", "--m", "3", "--s", "2", path(&manifest)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("stream_00002.csv"));
    let table = stdout(&out);
    let row: Vec<_> = table.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(row, ["6", "1", "0", "0", "83.33"]);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(&config, "m = 4\ns = 2\n").unwrap();
    let out = gtuple(&["tuples", "--config", path(&config)]);
    assert_eq!(stdout(&out).trim(), "12");
    let out = gtuple(&["tuples", "--config", path(&config), "--s", "3"]);
    assert_eq!(stdout(&out).trim(), "36");

    fs::write(&config, "m = 4\nbeam = 2\n").unwrap();
    let out = gtuple(&["tuples", "--config", path(&config)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("beam"), "{}", stderr(&out));
}

#[test]
fn plot_draws_probability_chart() {
    let dir = tempfile::tempdir().unwrap();
    let out = gtuple(&[
        "simulate",
        "--m",
        "2",
        "--s",
        "2",
        "--per-class",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stream = dir.path().join("stream_00000.csv");
    let out = gtuple(&["run", "--m", "2", "--s", "2", "--plot", path(&stream)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().ends_with("01PRN"));
    assert!(text.contains('@'));
    assert!(text.lines().any(|l| l.starts_with("TupleRecognized")));
}
