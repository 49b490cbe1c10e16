use std::path::Path;
use std::process::{Command, Output};

use gramcone::instances::{make, InstanceKind, InstanceSpec};
use gramcone::Instance;
use gramcone_cli::commands::parse_instance;
use gramcone_cli::dto::{InstanceDoc, PolicyDoc};
use gramcone_cli::jsonfmt;
use serde_json::Value;

fn gramcone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramcone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn counterexample_reports_all_false() {
    let out = gramcone(&["check", &data("counterexample2x2.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    for c in ["c1", "c2", "c3", "c4", "c5", "c6"] {
        assert_eq!(rep["verdicts"][c], Value::Bool(false), "{c}");
        assert!(rep["witnesses"][c].is_object(), "{c} has no witness");
    }
    assert_eq!(rep["agree"], Value::Bool(true));
}

#[test]
fn spec_input_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = gramcone(&[
        "check",
        "--input",
        &data("example42.json"),
        "--lemmas",
        "--strict-cond5",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(rep["verdicts"]["c1"], Value::Bool(true));
    // The kernel direction e₁ lies outside K, so the strict reading fails.
    assert_eq!(rep["strict_cond5"]["verdict"], Value::Bool(false));
    assert!(rep["lemmas"].is_object());
}

#[test]
fn emitted_instances_parse_back_bit_exact() {
    for seed in 0..50 {
        let spec = InstanceSpec::dims(InstanceKind::RandomSimplicialCone, seed, 5, 4, 3).unwrap();
        let inst: Instance = make(&spec).unwrap();
        let text = jsonfmt::to_string(&InstanceDoc::from_instance(&inst));
        let back = parse_instance(&text, &PolicyDoc::default()).unwrap();
        assert_eq!(back, inst, "seed {seed}");
        assert_eq!(jsonfmt::to_string(&InstanceDoc::from_instance(&back)), text);
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.json", "{ \"operator\": ");
    let out = gramcone(&["check", &junk]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("junk.json"));

    let unknown = write(
        dir.path(),
        "unknown.json",
        r#"{"operator": {"matrix": [[1.0]]}, "cone": {"kind": "orthant", "dim": 1}, "colour": 3}"#,
    );
    assert_eq!(gramcone(&["check", &unknown]).status.code(), Some(2));

    let missing = dir.path().join("absent.json");
    assert_eq!(gramcone(&["check", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(gramcone(&["sweep", "--seeds", "9..3"]).status.code(), Some(2));
}

#[test]
fn hypothesis_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // T projects onto the first axis; T†T maps the ray (1, 1) to (1, 0),
    // which leaves cone{(1, 1)}.
    let p = write(
        dir.path(),
        "hyp.json",
        r#"{"operator": {"matrix": [[1.0, 0.0], [0.0, 0.0]]},
            "cone": {"kind": "generated", "dim": 2, "matrix": [[1.0, 1.0]]}}"#,
    );
    let out = gramcone(&["check", &p]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("generator 0"));
}

#[test]
fn sweep_csv_has_one_row_per_seed() {
    let out = gramcone(&[
        "sweep",
        "--seeds",
        "0..19",
        "--dims",
        "4x4",
        "--format",
        "csv",
        "--workers",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "seed"));
    assert_eq!(rdr.records().count(), 20);
}

#[test]
fn examples_and_identities_succeed() {
    let out = gramcone(&["examples", "--level", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().map(Vec::len), Some(3));
    for row in rows.as_array().unwrap() {
        assert_eq!(row["matches_expected"], Value::Bool(true));
    }
    let out = gramcone(&["identities", "--seeds", "0..49", "--format", "pretty"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("failures 0"));
}
