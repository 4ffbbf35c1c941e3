use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rpst_walk::rps::max_entropy_pmf;

fn rpst(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpst"))
        .args(args)
        .current_dir(dir)
        .env_remove("RPST_OUT_DIR")
        .output()
        .expect("spawn rpst")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn last_value(text: &str) -> f64 {
    text.lines()
        .last()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn dist_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let per = stdout(&rpst(
        tmp.path(),
        &["dist", "--kind", "per", "--max-len", "6"],
    ));
    assert!(per.starts_with("n,p\n"));
    assert!((last_value(&per) - 0.368098).abs() < 1e-6);
    let rps = stdout(&rpst(
        tmp.path(),
        &["dist", "--kind", "rps", "--max-len", "10"],
    ));
    assert!((last_value(&rps) - 0.90433).abs() < 5e-6);
    assert_eq!(
        stdout(&rpst(tmp.path(), &["dist", "--max-len", "1"])),
        "n,p\n1,1\n"
    );

    let json: serde_json::Value = serde_json::from_str(&stdout(&rpst(
        tmp.path(),
        &["dist", "--max-len", "3", "--format", "json"],
    )))
    .unwrap();
    assert_eq!(json["denominator"], "117");
    assert_eq!(json["rows"][2]["numerator"], "90");
}

#[test]
fn entropy_values() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("single.json"),
        r#"{"n": 3, "masses": [{"event": [2], "mass": 1.0}]}"#,
    )
    .unwrap();
    let h: f64 = stdout(&rpst(tmp.path(), &["entropy", "single.json"]))
        .trim()
        .parse()
        .unwrap();
    assert_eq!(h, 0.0);

    fs::write(
        tmp.path().join("max2.json"),
        max_entropy_pmf(2).unwrap().to_json(),
    )
    .unwrap();
    let h: f64 = stdout(&rpst(tmp.path(), &["entropy", "max2.json"]))
        .trim()
        .parse()
        .unwrap();
    assert!((h - 10f64.log2()).abs() < 1e-9);

    let table = stdout(&rpst(tmp.path(), &["entropy", "--max-n", "6"]));
    assert_eq!(table.lines().count(), 7);
    assert!((last_value(&table) - 20.6690).abs() < 1e-4);

    let nats = stdout(&rpst(
        tmp.path(),
        &["entropy", "--max-n", "2", "--base", "2.718281828459045"],
    ));
    assert!((last_value(&nats) - 10f64.ln()).abs() < 1e-12);
}

#[test]
fn malformed_input_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.json"), "{ not json").unwrap();
    let out = rpst(tmp.path(), &["entropy", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    fs::write(
        tmp.path().join("unnormalized.json"),
        r#"{"n": 2, "masses": [{"event": [1], "mass": 0.4}]}"#,
    )
    .unwrap();
    assert_eq!(
        rpst(tmp.path(), &["entropy", "unnormalized.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rpst(tmp.path(), &["dist"]).status.code(), Some(2));
    assert_eq!(
        rpst(tmp.path(), &["dist", "--max-len", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rpst(tmp.path(), &["dist", "--kind", "uniform", "--max-len", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rpst(tmp.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn enumeration_beyond_limit_is_capacity_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rpst(tmp.path(), &["rvg-enum", "--n", "9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rvg_enum_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = stdout(&rpst(tmp.path(), &["rvg-enum", "--n", "4"]));
    assert_eq!(csv.lines().next(), Some("vx,vy,count"));
    assert_eq!(csv.lines().count(), 17);
    let total: u64 = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 24);

    let json: serde_json::Value = serde_json::from_str(&stdout(&rpst(
        tmp.path(),
        &["rvg-enum", "--n", "5", "--format", "json"],
    )))
    .unwrap();
    assert_eq!(json["distinct"], 120);
    let var = json["moments"]["var_x"].as_f64().unwrap();
    assert!((var - 25.0 * 6.0 / 24.0).abs() < 1e-9);
}

#[test]
fn rvg_is_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["rvg", "--n", "5", "--count", "50", "--seed", "9"];
    let a = stdout(&rpst(tmp.path(), &args));
    assert_eq!(a, stdout(&rpst(tmp.path(), &args)));
    assert_eq!(a.lines().count(), 51);
    let other = stdout(&rpst(
        tmp.path(),
        &["rvg", "--n", "5", "--count", "50", "--seed", "10"],
    ));
    assert_ne!(a, other);
}

#[test]
fn walk_writes_paths_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rpst(
        tmp.path(),
        &[
            "walk",
            "--steps",
            "40",
            "--max-len",
            "12",
            "--paths",
            "3",
            "--seed",
            "1",
            "--out-dir",
            "w",
        ],
    );
    assert!(out.status.success());
    let dir = tmp.path().join("w");
    for name in [
        "path_00000.csv",
        "path_00001.csv",
        "path_00002.csv",
        "summary.csv",
        "manifest.json",
    ] {
        assert!(dir.join(name).exists(), "{name}");
    }
    let path = fs::read_to_string(dir.join("path_00000.csv")).unwrap();
    assert_eq!(path.lines().next(), Some("t,x,y,n_step"));
    assert_eq!(path.lines().nth(1), Some("0,0,0,0"));
    assert_eq!(path.lines().count(), 42);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["rho"], 24.0);
    assert_eq!(manifest["path_count"], 3);
}

#[test]
fn out_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rpst"))
        .args(["walk", "--steps", "5", "--max-len", "4"])
        .current_dir(tmp.path())
        .env("RPST_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("from-env/path_00000.csv").exists());
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("cfg.json"),
        r#"{"steps": 7, "max_len": 5, "seed": 3, "paths": 2, "out_dir": "cfg-out"}"#,
    )
    .unwrap();
    assert!(rpst(
        tmp.path(),
        &["walk", "--config", "cfg.json", "--steps", "9"]
    )
    .status
    .success());
    let p = fs::read_to_string(tmp.path().join("cfg-out/path_00001.csv")).unwrap();
    assert_eq!(p.lines().count(), 11);

    fs::write(tmp.path().join("typo.json"), r#"{"stpes": 7}"#).unwrap();
    assert_eq!(
        rpst(tmp.path(), &["walk", "--config", "typo.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn run_manifest_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "walk",
        "--steps",
        "60",
        "--max-len",
        "20",
        "--paths",
        "4",
        "--seed",
        "77",
        "--scaled",
        "--out-dir",
        "first",
        "--manifest",
        "run.json",
    ];
    assert!(rpst(tmp.path(), &args).status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 77);
    assert!(manifest["duration_secs"].as_f64().unwrap() >= 0.0);
    assert_eq!(manifest["files"].as_array().unwrap().len(), 6);

    let mut replay: Vec<String> = manifest["command_line"]
        .as_array()
        .unwrap()
        .iter()
        .skip(1)
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let pos = replay.iter().position(|a| a == "first").unwrap();
    replay[pos] = "second".into();
    let replay: Vec<&str> = replay.iter().map(String::as_str).collect();
    assert!(rpst(tmp.path(), &replay).status.success());
    for name in [
        "path_00000.csv",
        "path_00003.csv",
        "summary.csv",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(tmp.path().join("first").join(name)).unwrap(),
            fs::read(tmp.path().join("second").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&stdout(&rpst(tmp.path(), &["verify", "--suite", "table1"]))).unwrap();
    assert_eq!(report["passed"], true);

    let small_ensemble = rpst(
        tmp.path(),
        &[
            "verify", "--suite", "wiener", "--steps", "100", "--paths", "200",
        ],
    );
    assert_eq!(small_ensemble.status.code(), Some(0));

    let low_rho = rpst(
        tmp.path(),
        &[
            "verify", "--suite", "wiener", "--steps", "100", "--paths", "200", "--rho", "1",
        ],
    );
    assert_eq!(low_rho.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&low_rho.stdout).unwrap();
    assert_eq!(report["passed"], false);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(
        failed.iter().any(|n| n.contains("variance slope")),
        "{failed:?}"
    );

    assert_eq!(
        rpst(tmp.path(), &["verify", "--suite", "nope"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn plots() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(rpst(
        tmp.path(),
        &["walk", "--steps", "30", "--max-len", "6", "--out-dir", "w"]
    )
    .status
    .success());
    assert!(rpst(
        tmp.path(),
        &[
            "plot",
            "w/path_00000.csv",
            "--kind",
            "path",
            "--out",
            "p.svg"
        ]
    )
    .status
    .success());
    let svg = fs::read_to_string(tmp.path().join("p.svg")).unwrap();
    assert_eq!(svg.matches("<line").count(), 30);

    assert!(rpst(
        tmp.path(),
        &["rvg", "--n", "4", "--count", "5000", "--seed", "4", "--out", "v4.csv"]
    )
    .status
    .success());
    assert!(rpst(
        tmp.path(),
        &["plot", "v4.csv", "--kind", "hist", "--column", "vx"]
    )
    .status
    .success());
    let svg = fs::read_to_string(tmp.path().join("v4.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="bin""#).count(), 6);

    assert!(rpst(
        tmp.path(),
        &[
            "walk",
            "--steps",
            "30",
            "--max-len",
            "6",
            "--paths",
            "5",
            "--out-dir",
            "e"
        ]
    )
    .status
    .success());
    assert!(rpst(
        tmp.path(),
        &[
            "plot",
            "e/summary.csv",
            "--kind",
            "series",
            "--out",
            "s.svg"
        ]
    )
    .status
    .success());
    assert_eq!(
        fs::read_to_string(tmp.path().join("s.svg"))
            .unwrap()
            .matches("<polyline")
            .count(),
        4
    );

    fs::write(tmp.path().join("empty.csv"), "").unwrap();
    assert_eq!(
        rpst(tmp.path(), &["plot", "empty.csv", "--kind", "path"])
            .status
            .code(),
        Some(2)
    );
}
