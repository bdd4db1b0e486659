use std::fs;
use std::process::{Command, Output};

fn ktcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktcert")).args(args).output().expect("run ktcert")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn counts_prints_equations_over_unknowns() {
    let o = ktcert(&["counts", "--valence", "7", "--parity", "0", "--prolong", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("2880/2700"));
    let o = ktcert(&["counts", "--valence", "9", "--parity", "1", "--prolong", "9", "--phi-parity", "even"]);
    assert_eq!(stdout(&o).lines().next(), Some("5005/4620"));
}

#[test]
fn exit_codes() {
    assert_eq!(ktcert(&[]).status.code(), Some(2));
    assert_eq!(ktcert(&["analyze", "--metric", "nope", "--valence", "1"]).status.code(), Some(3));
    let o = ktcert(&["analyze", "--metric", "darmois", "--valence", "1", "--point", "1,0"]);
    assert_eq!(o.status.code(), Some(4));
    let o = ktcert(&["analyze", "--metric", "ts2", "--valence", "1", "--mode", "static-split"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ktcert(&["analyze", "--metric", "flat_cyl", "--valence", "1", "--point", "1/0,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_metric_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.metric");
    fs::write(&path, "coords x y phi t\ng[x][x] = x +\n").unwrap();
    let o = ktcert(&["show", "--metric-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn report_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("flat.json");
    let dump = dir.path().join("flat.triplets");
    let o = ktcert(&[
        "analyze",
        "--metric",
        "flat_cyl",
        "--valence",
        "1",
        "--parity",
        "1",
        "--report",
        report.to_str().unwrap(),
        "--dump-matrix",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["mode"], "single-branch");
    assert_eq!(json["verdict"]["extra-candidates"], 1);
    assert_eq!(json["branches"][0]["cross_check"]["agrees"], true);
    let text = fs::read_to_string(&dump).unwrap();
    let header: Vec<usize> = text.lines().next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(header.len(), 3);
    assert_eq!(text.lines().count() - 1, header[2]);
}

#[test]
fn reports_are_deterministic() {
    let args = ["analyze", "--metric", "kerr_extreme", "--valence", "2", "--seed", "11"];
    let a = ktcert(&args);
    let b = ktcert(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let json: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(json["total_upper_bound"], 5);
}
