//! Exit-code and file-format contract of the command-line interface:
//! 0 success / verification passed, 1 verification failed or invalid input,
//! 2 parse or usage error, 3 search budget exhausted.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use schurcert::cert::Certificate;
use schurcert::opalg::NormingPair;
use schurcert::witness::{fourier_witness, SearchOutcome};

fn run(args: &[&str], paths: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_schurcert"));
    cmd.args(args);
    for p in paths {
        cmd.arg(p);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn validate_exit_codes_cover_valid_invalid_and_garbage() {
    let dir = tempfile::tempdir().unwrap();
    // Bare-matrix form, real entries.
    let good = write(dir.path(), "good.json", "[[1, 0.5], [0.5, 1]]");
    let out = run(&["validate"], &[&good]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("valid: true"));

    // Hermitian with unit diagonal but indefinite.
    let bad = write(dir.path(), "bad.json", "[[1, 2], [2, 1]]");
    let out = run(&["validate", "--json"], &[&bad]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["psd"], serde_json::Value::Bool(false));
    assert_eq!(report["hermitian"], serde_json::Value::Bool(true));

    let garbage = write(dir.path(), "garbage.json", "not json at all");
    assert_eq!(code(&run(&["validate"], &[&garbage])), 2);

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["validate"], &[&missing])), 2);
}

#[test]
fn search_reports_found_and_budget_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    let ones = write(dir.path(), "ones.json", "[[1, 1], [1, 1]]");
    let found_path = dir.path().join("found.json");
    let out = run(
        &["search"],
        &[&ones, Path::new("--out"), &found_path],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let outcome: SearchOutcome =
        serde_json::from_str(&std::fs::read_to_string(&found_path).unwrap()).unwrap();
    assert!(outcome.is_found());
    assert_eq!(outcome.witness().d(), 1);

    // The identity symbol has no d = 1 witness; capping the sweep there
    // exhausts the budget.
    let id2 = write(dir.path(), "id2.json", "[[1, 0], [0, 1]]");
    let miss_path = dir.path().join("miss.json");
    let out = run(
        &["search", "--d-max", "1"],
        &[&id2, Path::new("--out"), &miss_path],
    );
    assert_eq!(code(&out), 3, "{}", stdout(&out));
    let outcome: SearchOutcome =
        serde_json::from_str(&std::fs::read_to_string(&miss_path).unwrap()).unwrap();
    assert!(!outcome.is_found());
}

#[test]
fn dilate_passes_a_consistent_witness_and_rejects_a_mismatched_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let witness = serde_json::to_string(&fourier_witness(2)).unwrap();
    let wit = write(dir.path(), "wit.json", &witness);

    let out = run(&["dilate", "--depth", "3"], &[&wit]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("pass: true"));

    // The Fourier witness certifies the identity symbol, not all-ones.
    let ones = write(dir.path(), "ones.json", "[[1, 1], [1, 1]]");
    let out = run(
        &["dilate", "--depth", "3"],
        &[&wit, Path::new("--symbol"), &ones],
    );
    assert_eq!(code(&out), 1, "{}", stdout(&out));
}

#[test]
fn certify_recheck_and_tampering_detection() {
    let dir = tempfile::tempdir().unwrap();
    let ones = write(dir.path(), "ones.json", "[[1, 1, 1], [1, 1, 1], [1, 1, 1]]");
    let cert_path = dir.path().join("ones.cert.json");
    let out = run(&["certify"], &[&ones, Path::new("--out"), &cert_path]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    // Canonical serialization round-trips byte for byte.
    let text = std::fs::read_to_string(&cert_path).unwrap();
    let cert: Certificate = serde_json::from_str(&text).unwrap();
    assert_eq!(cert.to_canonical_json().unwrap(), text);

    assert_eq!(code(&run(&["recheck"], &[&cert_path])), 0);

    // Tampering with the recorded residual is caught as a failed recheck.
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["residual"] = serde_json::json!(1e-3);
    let tampered = write(dir.path(), "tampered.json", &value.to_string());
    assert_eq!(code(&run(&["recheck"], &[&tampered])), 1);

    // A truncated file is a parse error, not a failed verification.
    let truncated = write(dir.path(), "truncated.json", &text[..text.len() / 2]);
    assert_eq!(code(&run(&["recheck"], &[&truncated])), 2);

    // An unknown schema version is rejected before any verification.
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["schema_version"] = serde_json::json!("0");
    let wrong = write(dir.path(), "wrong_schema.json", &value.to_string());
    assert_eq!(code(&run(&["recheck"], &[&wrong])), 2);
}

#[test]
fn certify_stdout_payload_is_a_stable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let ones = write(dir.path(), "ones.json", "[[1, 1], [1, 1]]");
    let first = run(&["certify", "--seed", "7"], &[&ones]);
    let second = run(&["certify", "--seed", "7"], &[&ones]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let cert: Certificate = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(cert.to_canonical_json().unwrap(), stdout(&first));
}

#[test]
fn norming_writes_a_dual_pair_and_rejects_nonsquare_input() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.json", "[[1, 2], [0, 1]]");
    let pair_path = dir.path().join("pair.json");
    let out = run(
        &["norming", "--p", "1.5"],
        &[&x, Path::new("--out"), &pair_path],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let pair: NormingPair =
        serde_json::from_str(&std::fs::read_to_string(&pair_path).unwrap()).unwrap();
    assert_eq!(pair.q, 3.0);

    let rect = write(dir.path(), "rect.json", "[[1, 0, 0], [0, 1, 0]]");
    assert_eq!(code(&run(&["norming"], &[&rect])), 1);
}
