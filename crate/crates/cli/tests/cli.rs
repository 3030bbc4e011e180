//! Black-box tests of the binary: exit-code contract, byte-stable
//! JSON, artifact round-trips through `export`, file outputs of
//! `build`, thread-count invariance, and the size-cap environment
//! override.

use std::path::PathBuf;
use std::process::{Command, Output};

fn sparkdict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparkdict"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn certify_and_spark_agree_through_the_json_surface() {
    let cert = sparkdict(&["certify", "-r", "1", "-t", "1"]);
    assert!(cert.status.success());
    let cert_json: serde_json::Value = serde_json::from_str(&stdout_of(&cert)).unwrap();
    assert_eq!(cert_json["concluded_spark"], serde_json::json!(3));
    assert_eq!(
        cert_json["coherence"],
        serde_json::json!({"num": 1, "den": 2})
    );

    let spark = sparkdict(&["spark", "-r", "1", "-t", "1", "--k-max", "3"]);
    assert!(spark.status.success());
    let spark_json: serde_json::Value = serde_json::from_str(&stdout_of(&spark)).unwrap();
    assert_eq!(spark_json["spark"], cert_json["concluded_spark"]);
    assert_eq!(
        spark_json["witness"]["indices"],
        cert_json["witness"]["indices"]
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let first = sparkdict(&["certify", "-r", "2", "-t", "1"]);
    let second = sparkdict(&["certify", "-r", "2", "-t", "1"]);
    assert!(first.status.success());
    assert_eq!(
        first.stdout, second.stdout,
        "certify output must not drift between runs"
    );

    let first = sparkdict(&["spark", "-r", "1", "-t", "1", "--k-max", "3", "--no-prune"]);
    let second = sparkdict(&["spark", "-r", "1", "-t", "1", "--k-max", "3", "--no-prune"]);
    assert!(first.status.success());
    assert_eq!(
        first.stdout, second.stdout,
        "spark output must not drift between runs"
    );
}

#[test]
fn threaded_search_matches_sequential_bytes() {
    let sequential = sparkdict(&["spark", "-r", "2", "-t", "1", "--k-max", "3", "--no-prune"]);
    let threaded = sparkdict(&[
        "spark",
        "-r",
        "2",
        "-t",
        "1",
        "--k-max",
        "3",
        "--no-prune",
        "--threads",
        "4",
    ]);
    assert!(sequential.status.success() && threaded.status.success());
    assert_eq!(sequential.stdout, threaded.stdout);

    // The lower-bound path: no dependent subset of size ≤ 3 among the
    // 80 columns, so exactly C(80,2) + C(80,3) leaves are examined.
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&sequential)).unwrap();
    assert_eq!(report["lower_bound"], serde_json::json!(4));
    assert_eq!(report["subsets_examined"], serde_json::json!(85_320));

    let sequential = sparkdict(&["spark", "-r", "1", "-t", "1", "--k-max", "3"]);
    let threaded = sparkdict(&[
        "spark",
        "-r",
        "1",
        "-t",
        "1",
        "--k-max",
        "3",
        "--threads",
        "2",
    ]);
    assert_eq!(
        sequential.stdout, threaded.stdout,
        "witness path must also be schedule-free"
    );
}

#[test]
fn usage_errors_exit_with_code_two() {
    let cases: &[&[&str]] = &[
        &["certify", "-r", "1", "-t", "1", "--bogus"],
        &["spark", "-r", "1", "-t", "1"],
        &["verify"],
        &["certify", "-r", "0", "-t", "1"],
        &["spark", "-r", "1", "-t", "1", "--k-max", "1"],
        &["export", "/nonexistent/artifact.json"],
    ];
    for args in cases {
        let output = sparkdict(args);
        assert_eq!(
            output.status.code(),
            Some(2),
            "expected usage failure for {args:?}"
        );
    }
}

#[test]
fn size_cap_env_rejects_oversized_instances() {
    let within = Command::new(env!("CARGO_BIN_EXE_sparkdict"))
        .args(["certify", "-r", "1", "-t", "2"])
        .env("SPARKDICT_MAX_N", "4")
        .output()
        .unwrap();
    assert!(within.status.success());

    let beyond = Command::new(env!("CARGO_BIN_EXE_sparkdict"))
        .args(["certify", "-r", "1", "-t", "3"])
        .env("SPARKDICT_MAX_N", "4")
        .output()
        .unwrap();
    assert_eq!(beyond.status.code(), Some(2));
    let stderr = String::from_utf8(beyond.stderr).unwrap();
    assert!(
        stderr.contains("size cap"),
        "stderr should name the cap: {stderr}"
    );
}

#[test]
fn build_writes_dictionary_csv_and_manifest() {
    let dir = tmp("build_out");
    let output = sparkdict(&[
        "build",
        "-r",
        "1",
        "-t",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success());

    let csv = std::fs::read_to_string(dir.join("dictionary_r1_t1.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    // Labels contain commas, so the writer must quote them.
    assert!(header.contains("\"a=0x0,b=0x0\""), "header: {header}");
    assert!(header.contains("\"e,x=0x0\""), "header: {header}");
    assert_eq!(
        csv.lines().count(),
        1 + 4,
        "header plus one row per coordinate"
    );

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest_r1_t1.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["column_labels"].as_array().unwrap().len(), 12);
    assert_eq!(manifest["scale_log2"], serde_json::json!(1));
}

#[test]
fn export_round_trips_artifacts() {
    let cert_path = tmp("roundtrip_cert.json");
    let out = sparkdict(&[
        "certify",
        "-r",
        "1",
        "-t",
        "1",
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let original = std::fs::read(&cert_path).unwrap();

    let rejson = sparkdict(&["export", cert_path.to_str().unwrap()]);
    assert!(rejson.status.success());
    assert_eq!(
        rejson.stdout, original,
        "canonical JSON must round-trip byte-for-byte"
    );

    let text = sparkdict(&["export", cert_path.to_str().unwrap(), "--format", "text"]);
    assert!(text.status.success());
    assert!(stdout_of(&text).contains("concluded spark: 3"));

    let csv = sparkdict(&["export", cert_path.to_str().unwrap(), "--format", "csv"]);
    assert!(csv.status.success());
    let table = stdout_of(&csv);
    assert!(table.starts_with("name,pass,detail"));
    assert!(table.contains("witness_zero_sum,true"));

    // A spark report and a manifest are detected as themselves too.
    let spark_path = tmp("roundtrip_spark.json");
    sparkdict(&[
        "spark",
        "-r",
        "1",
        "-t",
        "1",
        "--k-max",
        "3",
        "--out",
        spark_path.to_str().unwrap(),
    ]);
    let spark_text = sparkdict(&["export", spark_path.to_str().unwrap(), "--format", "text"]);
    assert!(stdout_of(&spark_text).starts_with("spark: 3"));
}

#[test]
fn exporting_a_failing_artifact_exits_one() {
    let cert_path = tmp("doctored_cert.json");
    sparkdict(&[
        "certify",
        "-r",
        "1",
        "-t",
        "1",
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    value["checks"][0]["pass"] = serde_json::json!(false);
    let doctored_path = tmp("doctored_cert_flipped.json");
    std::fs::write(&doctored_path, serde_json::to_string(&value).unwrap()).unwrap();

    let output = sparkdict(&[
        "export",
        doctored_path.to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(
        output.status.code(),
        Some(1),
        "a failing certificate must propagate exit 1"
    );
    assert!(stdout_of(&output).contains("FAIL"));
}

#[test]
fn verify_all_covers_the_grid_and_passes() {
    let output = sparkdict(&["verify", "--all", "--format", "text"]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    assert_eq!(
        text.lines().count(),
        5 * 12,
        "12 checks for each of the 5 grid instances"
    );
    assert!(text.lines().all(|line| line.starts_with("ok  ")));
}

#[test]
fn recovery_demo_reports_full_success() {
    let output = sparkdict(&[
        "recover", "-r", "1", "-t", "1", "--trials", "5", "--seed", "42",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(report["successes"], serde_json::json!(5));
    assert_eq!(report["trials"], serde_json::json!(5));
    assert_eq!(report["seed"], serde_json::json!(42));
    assert_eq!(
        report["collision_exhibit"]["synthesized_equal"],
        serde_json::json!(true)
    );
}
