//! Every report the binary emits must validate against the shipped JSON
//! schema, and exit codes must follow the 0 / 1 / 2 convention.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_procmat"));
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::piped());
    cmd.stdin(if stdin.is_some() {
        Stdio::piped()
    } else {
        Stdio::null()
    });
    let mut child = cmd.spawn().expect("spawn procmat");
    if let Some(bytes) = stdin {
        child
            .stdin
            .take()
            .expect("stdin handle")
            .write_all(bytes)
            .expect("write stdin");
    }
    child.wait_with_output().expect("wait for procmat")
}

fn shipped_validator() -> jsonschema::Validator {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let text = std::fs::read_to_string(path).expect("read docs/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&text).expect("schema is JSON");
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_conforms(validator: &jsonschema::Validator, output: &Output, what: &str) -> serde_json::Value {
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout)
        .unwrap_or_else(|e| panic!("{what}: stdout is not JSON: {e}"));
    let errors: Vec<String> = validator
        .iter_errors(&doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{what}: schema violations: {errors:#?}");
    doc
}

#[test]
fn every_subcommand_report_matches_the_shipped_schema() {
    let validator = shipped_validator();

    let switch4 = run(&["switch", "--variant", "4"], None);
    assert!(switch4.status.success(), "switch --variant 4 failed");
    assert_conforms(&validator, &switch4, "switch --variant 4");

    let switch3 = run(&["switch", "--variant", "3", "--dim", "3"], None);
    assert!(switch3.status.success(), "switch --variant 3 failed");
    assert_conforms(&validator, &switch3, "switch --variant 3 --dim 3");

    let valid = run(&["validate"], Some(&switch4.stdout));
    assert_eq!(valid.status.code(), Some(0), "validate on the switch");
    let doc = assert_conforms(&validator, &valid, "validate (valid input)");
    assert_eq!(doc["results"]["verdict"], "valid");

    let batch = run(
        &["nogo-batch", "--dim", "2", "--trials", "3", "--seed", "11"],
        None,
    );
    assert_eq!(batch.status.code(), Some(0), "nogo-batch");
    assert_conforms(&validator, &batch, "nogo-batch");

    let chains = run(
        &[
            "nogo-chains",
            "--parties",
            "2",
            "--trials",
            "2",
            "--seed",
            "11",
        ],
        None,
    );
    assert_eq!(chains.status.code(), Some(0), "nogo-chains");
    assert_conforms(&validator, &chains, "nogo-chains");

    let superpose = run(
        &[
            "unitary-superpose",
            "--u1",
            "sx",
            "--u2",
            "sz",
            "--alpha",
            "[0.7071067811865476,0]",
            "--beta",
            "[0.7071067811865476,0]",
        ],
        None,
    );
    assert_eq!(superpose.status.code(), Some(0), "unitary-superpose");
    assert_conforms(&validator, &superpose, "unitary-superpose");
}

#[test]
fn rejected_processes_exit_one_and_still_conform() {
    let validator = shipped_validator();
    let switch4 = run(&["switch", "--variant", "4"], None);
    assert!(switch4.status.success());

    // Scale every entry so the trace (and unit-probability rule) breaks.
    let mut doc: serde_json::Value = serde_json::from_slice(&switch4.stdout).unwrap();
    let entries = doc["results"]["process"]["data"]["entries"]
        .as_array_mut()
        .expect("entries array");
    for pair in entries {
        for part in pair.as_array_mut().expect("complex pair") {
            let v = part.as_f64().expect("number");
            *part = serde_json::json!(v * 1.25);
        }
    }
    let payload = serde_json::to_vec(&doc["results"]["process"]).unwrap();

    let invalid = run(&["validate"], Some(&payload));
    assert_eq!(invalid.status.code(), Some(1), "scaled process must be rejected");
    let report = assert_conforms(&validator, &invalid, "validate (invalid input)");
    assert_eq!(report["results"]["verdict"], "invalid");
    assert!(
        report["results"]["report"]["violating_tuple"].is_object(),
        "rejection must carry an explicit witness tuple"
    );
}

#[test]
fn usage_errors_exit_two() {
    let bad_flag = run(&["nogo-batch", "--dim", "2", "--trials", "3"], None);
    assert_eq!(bad_flag.status.code(), Some(2), "missing --seed is a usage error");

    let bad_sub = run(&["frobnicate"], None);
    assert_eq!(bad_sub.status.code(), Some(2), "unknown subcommand is a usage error");

    let bad_dim = run(
        &["nogo-batch", "--dim", "1", "--trials", "1", "--seed", "1"],
        None,
    );
    assert_eq!(bad_dim.status.code(), Some(2), "dim < 2 is a usage error");
}
