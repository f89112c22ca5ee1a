use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn stylodist(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stylodist"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn workspace(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in files {
        let path = dir.path().join(name);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, body).unwrap();
    }
    dir
}

const SELF_LOOP_VS_STOP: &str =
    r#"{"format_version": 1, "labels": ["s1", "s2"], "rows": [[[1, "1"]], []]}"#;
const TWO_PAIRS: &str = r#"{"format_version": 1, "labels": ["s1", "s2", "s3", "s4"],
  "rows": [[[3, "0.5"]], [[4, "0.5"]], [], []]}"#;
const SAME_ROWS: &str = r#"{"format_version": 1, "labels": ["x", "y", "z"],
  "rows": [[[1, "0.5"], [2, "0.5"]], [[2, "0.5"], [3, "0.5"]], [[3, "0.5"], [1, "0.5"]]]}"#;

#[test]
fn build_letters_writes_four_states() {
    let dir = workspace(&[("ab.txt", "ab. ab.")]);
    let out = stylodist(&["build", "--feature", "letters", "ab.txt"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["format_version"], 1);
    assert_eq!(
        json["labels"],
        serde_json::json!(["<start>", "a", "b", "<end>"])
    );
}

#[test]
fn build_to_output_file() {
    let dir = workspace(&[("ab.txt", "ab. ab.")]);
    let out = stylodist(&["build", "ab.txt", "--output", "ab.json"], dir.path());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = fs::read_to_string(dir.path().join("ab.json")).unwrap();
    assert!(written.contains("\"<end>\""));
}

#[test]
fn build_rejects_empty_file() {
    let dir = workspace(&[("empty.txt", "")]);
    let out = stylodist(&["build", "empty.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("empty input"));
    assert!(out.stdout.is_empty());
}

#[test]
fn build_reports_tsv_line() {
    let dir = workspace(&[("bad.tsv", "the\tDT\ncat NN\n.\t.\n")]);
    let out = stylodist(&["build", "--feature", "pos", "bad.tsv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn build_grammar_from_trees() {
    let dir = workspace(&[("t.trees", "(S (NP (NN x)) (VP (VB y)) (. .))\n")]);
    let out = stylodist(&["build", "--feature", "grammar", "t.trees"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"NP\""));
}

#[test]
fn dist_on_golden_system() {
    let dir = workspace(&[("two.json", SELF_LOOP_VS_STOP)]);
    let out = stylodist(&["dist", "two.json"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert!(table.lines().nth(1).unwrap().ends_with("1.0000"), "{table}");

    let out = stylodist(&["dist", "--format", "json", "two.json"], dir.path());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["d"][0][1], "1");
    assert_eq!(json["iterations"], 51);
}

#[test]
fn dist_between_identical_texts_is_small() {
    let dir = workspace(&[("t.txt", "the cat sat. on the mat!")]);
    let out = stylodist(&["dist", "--format", "json", "t.txt", "t.txt"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let d: f64 = json["distance"].as_str().unwrap().parse().unwrap();
    assert!(d <= 0.01);
}

#[test]
fn dist_between_texts_matches_hand_value() {
    let dir = workspace(&[("a.txt", "ab. ab."), ("b.txt", "b. b.")]);
    let out = stylodist(&["dist", "a.txt", "b.txt"], dir.path());
    assert_eq!(stdout(&out), "Letters  0.8100\n");
}

#[test]
fn dist_rejects_invalid_json() {
    let dir = workspace(&[("bad.json", "{")]);
    let out = stylodist(&["dist", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_parameters_are_usage_errors() {
    let dir = workspace(&[("two.json", SELF_LOOP_VS_STOP)]);
    let out = stylodist(&["dist", "--discount", "1.5", "two.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = stylodist(&["dist", "--feature", "nope", "two.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bisim_listings() {
    let dir = workspace(&[
        ("pairs.json", TWO_PAIRS),
        ("same.json", SAME_ROWS),
        ("two.json", SELF_LOOP_VS_STOP),
    ]);
    assert_eq!(
        stdout(&stylodist(&["bisim", "pairs.json"], dir.path())),
        "s1,s2\ns3,s4\n"
    );
    assert_eq!(
        stdout(&stylodist(&["bisim", "same.json"], dir.path())),
        "x,y,z\n"
    );
    assert_eq!(
        stdout(&stylodist(&["bisim", "two.json"], dir.path())),
        "s1\ns2\n"
    );
    let out = stylodist(&["bisim", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

fn corpus() -> TempDir {
    workspace(&[
        ("text.txt", "the cat sat on the mat. a dog ran!"),
        ("cats/news/a.txt", "the cat sat on the mat."),
        ("cats/news/b.txt", "a dog ran!"),
        ("cats/fiction/one.txt", "zzzzzzzzzzzz qqqqqqqqq. x."),
    ])
}

#[test]
fn classify_ranks_matching_category_first() {
    let dir = corpus();
    let out = stylodist(
        &["classify", "--categories", "cats", "text.txt"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert!(table.ends_with("ranking: news, fiction\n"), "{table}");
    assert!(table.lines().any(|l| l.starts_with("Euclid")));
}

#[test]
fn classify_output_is_deterministic() {
    let dir = corpus();
    let args = [
        "classify",
        "--format",
        "json",
        "--categories",
        "cats",
        "text.txt",
    ];
    let first = stylodist(&args, dir.path());
    let mut serial = vec!["--threads", "1"];
    serial.extend(args);
    let second = stylodist(&serial, dir.path());
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let json: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(json["ranking"][0], "news");
}

#[test]
fn classify_reports_missing_feature() {
    let dir = workspace(&[
        ("text.txt", "ab."),
        ("text.trees", "(S (NP (NN x)) (. .))\n"),
        ("cats/news/a.txt", "ab."),
    ]);
    let out = stylodist(
        &["classify", "--categories", "cats", "text.txt", "text.trees"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let message = stderr(&out);
    assert!(
        message.contains("news") && message.contains("grammar"),
        "{message}"
    );
}

#[test]
fn classify_without_category_dir() {
    let dir = workspace(&[("text.txt", "ab.")]);
    let out = stylodist(
        &["classify", "--categories", "nowhere", "text.txt"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
