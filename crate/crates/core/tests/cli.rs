use std::path::Path;
use std::process::{Command, Output};

fn seqgap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqgap"))
        .args(args)
        .env("SEQGAP_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.json");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const SPEC: &str = r#"{
  "version": 1,
  "name": "small",
  "gates": [{"kind": "CNOT"}, {"kind": "CPHASE"}, {"kind": "RANDOM_UNITARY", "seed": 3}],
  "shapes": [{"n_qubits": 2, "ancilla_dim": 2}],
  "metrics": ["FROBENIUS"],
  "optimizer": {"restarts": 3, "seed": 11}
}"#;

#[test]
fn run_writes_reports_traces_and_mpos() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let out_dir = dir.path().join("out");
    let out = seqgap(&["run", "--spec", &spec], &out_dir);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("small.json").exists());
    let csv = std::fs::read_to_string(out_dir.join("small.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("gate,"));
    assert_eq!(
        std::fs::read_dir(out_dir.join("traces")).unwrap().count(),
        3
    );
    assert_eq!(std::fs::read_dir(out_dir.join("mpos")).unwrap().count(), 3);

    let shown = seqgap(
        &[
            "show",
            "--report",
            out_dir.join("small.json").to_str().unwrap(),
        ],
        &out_dir,
    );
    assert!(shown.status.success());
    let text = String::from_utf8_lossy(&shown.stdout);
    assert!(text.contains("CNOT") && text.contains("CPHASE"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(seqgap(&["run", "--spec", &spec], &a).status.success());
    assert!(
        seqgap(&["run", "--spec", &spec, "--out", b.to_str().unwrap()], &a)
            .status
            .success()
    );
    for file in ["small.json", "small.csv"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file} differs"
        );
    }
}

#[test]
fn seed_flag_overrides_spec_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(seqgap(&["run", "--spec", &spec], &a).status.success());
    assert!(seqgap(&["run", "--spec", &spec, "--seed", "12"], &b)
        .status
        .success());
    let ra: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("small.json")).unwrap()).unwrap();
    let rb: serde_json::Value =
        serde_json::from_slice(&std::fs::read(b.join("small.json")).unwrap()).unwrap();
    let digest = |v: &serde_json::Value| v["cells"][0]["report"]["config_digest"].clone();
    assert_ne!(digest(&ra), digest(&rb));
}

#[test]
fn mismatched_toffoli_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &SPEC.replace("\"CNOT\"", "\"TOFFOLI\""));
    let out_dir = dir.path().join("out");
    let out = seqgap(&["run", "--spec", &spec], &out_dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TOFFOLI"));
    assert!(!out_dir.exists());
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "{\n  \"version\": 1,\n  \"name\": \"x\",\n  \"gates\": [{\"kind\": \"NOPE\"}]\n}",
    );
    let out = seqgap(&["run", "--spec", &spec], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spec.json:4:"), "{err}");
}

#[test]
fn failed_cell_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let body = SPEC
        .replace(
            "[{\"n_qubits\": 2, \"ancilla_dim\": 2}]",
            "[{\"n_qubits\": 2, \"ancilla_dim\": 2, \"input_qubits\": 1}]",
        )
        .replace("[\"FROBENIUS\"]", "[\"FROBENIUS\", \"PNORM2\"]");
    let spec = write_spec(dir.path(), &body);
    let out_dir = dir.path().join("out");
    let out = seqgap(&["run", "--spec", &spec], &out_dir);
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(out_dir.join("small.csv")).unwrap();
    // the Frobenius cells still completed
    assert_eq!(csv.lines().count(), 4);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED"));
}

#[test]
fn scaling_verb_validates_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = seqgap(&["scaling", "--family", "3"], dir.path());
    assert!(!out.status.success());
    let out = seqgap(
        &["scaling", "--family", "1", "--nmax", "3", "--restarts", "2"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("scaling_gen_cnot_1.csv").exists());
}
