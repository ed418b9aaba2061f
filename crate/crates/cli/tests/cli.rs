use std::path::Path;
use std::process::{Command, Output};

fn pwaff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwaff"))
        .args(args)
        .env_remove("PWAFF_CELL_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn partition_counts_example1_cells() {
    let o = pwaff(&["--format", "csv", "partition", "example1", "-n", "5"]);
    assert_eq!(code(&o), 0);
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert_eq!(last, "5,32,32");
}

#[test]
fn identity_partition_stays_trivial() {
    let o = pwaff(&["--format", "json", "partition", "identity", "-n", "9"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cells"]["entries"][8]["value"], 1);
}

#[test]
fn exported_map_reads_back_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("ex3.json");
    let o = pwaff(&["catalog", "export", "example3"]);
    assert_eq!(code(&o), 0);
    std::fs::write(&map, stdout(&o)).unwrap();

    let out = dir.path().join("run");
    let o = pwaff(&[
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
        "partition",
        map.to_str().unwrap(),
        "-n",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    let cells: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("partition.json")).unwrap()).unwrap();
    let summary = std::fs::read_to_string(out.join("partition_summary.csv")).unwrap();
    let last: Vec<&str> = summary.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "3");
    assert_eq!(cells.as_array().unwrap().len().to_string(), last[1]);
    let first = &cells[0];
    assert!(first["word"].is_array());
    assert!(first["composed"]["A"][0][0].is_string());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&pwaff(&["verify", "no-such-fixture"])), 4);
    assert_eq!(code(&pwaff(&["frobnicate"])), 4);
    assert_eq!(code(&pwaff(&["partition", "missing.json", "-n", "2"])), 4);
    assert_eq!(code(&pwaff(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim":1,"ambient":{"constraints":[]},"pieces":[]}"#).unwrap();
    assert_eq!(code(&pwaff(&["partition", bad.to_str().unwrap(), "-n", "2"])), 2);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&pwaff(&["partition", bad.to_str().unwrap(), "-n", "2"])), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_pwaff"))
        .args(["partition", "doubling", "-n", "6"])
        .env("PWAFF_CELL_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_identity_passes() {
    let o = pwaff(&["--format", "json", "verify", "identity"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["pass"], true);
}

fn json_with_threads(threads: &str, args: &[&str]) -> String {
    let mut full = vec!["--threads", threads, "--format", "json"];
    full.extend_from_slice(args);
    let o = pwaff(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn json_is_identical_across_thread_counts() {
    let runs: [&[&str]; 3] = [
        &[
            "estimate",
            "doubling",
            "--n-max",
            "8",
            "--grid",
            "512",
            "--samples",
            "2000",
            "--rates-n",
            "5",
        ],
        &["rates", "example3", "-n", "5", "--samples", "500"],
        &[
            "skew-bound",
            "example2",
            "-n",
            "3",
            "-m",
            "3",
            "--n-max",
            "4",
            "--grid",
            "32",
            "--samples",
            "500",
            "--rates-n",
            "3",
            "--eps-ladder",
            "0.25",
        ],
    ];
    for args in runs {
        assert_eq!(json_with_threads("1", args), json_with_threads("4", args), "{args:?}");
    }
}

#[test]
fn partition_export_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let read = |t: &str| {
        let out = dir.path().join(t);
        let o = pwaff(&[
            "--threads",
            t,
            "--out",
            out.to_str().unwrap(),
            "partition",
            "catmap",
            "-n",
            "4",
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(Path::new(&out).join("partition.json")).unwrap()
    };
    assert_eq!(read("1"), read("3"));
}

#[test]
fn catalog_lists_worked_examples() {
    let o = pwaff(&["catalog", "list"]);
    let names = stdout(&o);
    for n in ["example1", "example2", "example3", "catmap"] {
        assert!(names.lines().any(|l| l == n));
    }
}
