mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gbfrs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbfrs"))
        .args(args)
        .env_remove("GBFRS_SEED")
        .output()
        .expect("binary runs")
}

fn wine_path() -> String {
    common::data_path("wine.csv").display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_balls_writes_a_ball_set_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("balls.json");
    let run = gbfrs(&[
        "generate-balls",
        "--input",
        &wine_path(),
        "--label-col",
        "class",
        "--purity",
        "0.85",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let summary = String::from_utf8(run.stdout).unwrap();
    assert!(summary.contains("balls: "));
    assert!(summary.contains("coverage: ok (178 samples"));

    let json = read_json(&out);
    assert_eq!(json["purity_threshold"], 0.85);
    assert_eq!(json["source_n"], 178);
    let header = &json["header"];
    assert_eq!(header["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(header["seed"], 7);
    assert_eq!(header["config"]["purity"], 0.85);
    assert_eq!(header["config"]["initial_balls"], "ceil");
    assert_eq!(header["config"]["normalize"], true);
    assert_eq!(header["dataset"]["sha256"].as_str().unwrap().len(), 64);
    let members: usize = json["balls"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["members"].as_array().unwrap().len())
        .sum();
    assert_eq!(members, 178);
}

#[test]
fn same_flags_give_byte_identical_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("balls.json");
    let args = [
        "generate-balls",
        "--input",
        &wine_path(),
        "--purity",
        "0.9",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ];
    assert!(gbfrs(&args).status.success());
    let first = fs::read(&out).unwrap();
    assert!(gbfrs(&args).status.success());
    assert_eq!(first, fs::read(&out).unwrap());
}

#[test]
fn invalid_purity_exits_with_two() {
    let run = gbfrs(&["generate-balls", "--input", &wine_path(), "--purity", "1.5"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("purity must be in (0,1]"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let run = gbfrs(&["select", "--input", &wine_path(), "--bogus"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn missing_input_file_is_a_runtime_error() {
    let run = gbfrs(&["generate-balls", "--input", "/nonexistent/file.csv"]);
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn both_selection_modes_produce_traces() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["gbfrs", "classic"] {
        let out = dir.path().join(format!("{mode}.json"));
        let run = gbfrs(&[
            "select",
            "--input",
            &wine_path(),
            "--mode",
            mode,
            "--purity",
            "0.9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            run.status.success(),
            "{}",
            String::from_utf8_lossy(&run.stderr)
        );
        let json = read_json(&out);
        let chosen = json["chosen"].as_array().unwrap();
        assert!(!chosen.is_empty() && chosen.len() <= 13);
        assert_eq!(
            json["dependency_path"].as_array().unwrap().len(),
            chosen.len()
        );
        for key in [
            "mode",
            "purity_threshold",
            "seed",
            "significance_path",
            "stopped_reason",
            "header",
        ] {
            assert!(json.get(key).is_some(), "{mode} trace lacks {key}");
        }
        let names = String::from_utf8(run.stdout).unwrap();
        assert_eq!(names.trim().split(',').count(), chosen.len());
    }
}

#[test]
fn select_reuses_a_saved_ball_set() {
    let dir = tempfile::tempdir().unwrap();
    let balls = dir.path().join("balls.json");
    let fresh = dir.path().join("fresh.json");
    let cached = dir.path().join("cached.json");
    let input = wine_path();
    let gen = [
        "generate-balls",
        "--input",
        &input,
        "--purity",
        "0.8",
        "--seed",
        "5",
        "--out",
        balls.to_str().unwrap(),
    ];
    assert!(gbfrs(&gen).status.success());
    let sel = [
        "select",
        "--input",
        &input,
        "--purity",
        "0.8",
        "--seed",
        "5",
        "--out",
        fresh.to_str().unwrap(),
    ];
    assert!(gbfrs(&sel).status.success());
    let run = gbfrs(&[
        "select",
        "--input",
        &input,
        "--balls",
        balls.to_str().unwrap(),
        "--out",
        cached.to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let (a, b) = (read_json(&fresh), read_json(&cached));
    assert_eq!(a["chosen"], b["chosen"]);
    assert_eq!(a["dependency_path"], b["dependency_path"]);
    assert_eq!(b["purity_threshold"], 0.8);
}

#[test]
fn ball_set_from_another_dataset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let balls = dir.path().join("iris_balls.json");
    let iris = common::data_path("iris.csv").display().to_string();
    assert!(gbfrs(&[
        "generate-balls",
        "--input",
        &iris,
        "--out",
        balls.to_str().unwrap()
    ])
    .status
    .success());
    let run = gbfrs(&[
        "select",
        "--input",
        &wine_path(),
        "--balls",
        balls.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn sweep_counts_folds_times_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let iris = common::data_path("iris.csv").display().to_string();
    let run = gbfrs(&[
        "sweep",
        "--input",
        &iris,
        "--noise",
        "0",
        "--seeds",
        "1,2,3,4,5",
        "--purity-grid",
        "0.8,1.0",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let json = read_json(&out);
    let cells = json["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 3);
    for cell in cells {
        assert_eq!(cell["runs"], 25);
        assert_eq!(cell["noise_level"], 0.0);
        assert_eq!(cell["knn_k"], 3);
        assert!(cell.get("seconds").is_none());
    }
    assert_eq!(json["header"]["seed"], serde_json::json!([1, 2, 3, 4, 5]));

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("dataset,method,noise_kind,noise_level"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn sweep_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let iris = common::data_path("iris.csv").display().to_string();
    let args = [
        "sweep",
        "--input",
        &iris,
        "--noise",
        "0,0.2",
        "--methods",
        "gbfrs,classic-frs",
        "--purity-grid",
        "0.7,0.9",
        "--folds",
        "3",
        "--out",
        out.to_str().unwrap(),
    ];
    assert!(gbfrs(&args).status.success());
    let first = fs::read(&out).unwrap();
    assert!(gbfrs(&args).status.success());
    assert_eq!(first, fs::read(&out).unwrap());
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# defaults\npurity = 0.7\nseed = 9\nlabel_col = class\n",
    )
    .unwrap();
    let out = dir.path().join("balls.json");
    let run = gbfrs(&[
        "generate-balls",
        "--input",
        &wine_path(),
        "--config",
        cfg.to_str().unwrap(),
        "--purity",
        "0.95",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let json = read_json(&out);
    assert_eq!(json["purity_threshold"], 0.95);
    assert_eq!(json["header"]["config"]["seed"], 9);
    assert_eq!(json["header"]["config"]["label_col"], "class");
}

#[test]
fn seed_environment_variable_overrides_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("balls.json");
    let run = Command::new(env!("CARGO_BIN_EXE_gbfrs"))
        .args([
            "generate-balls",
            "--input",
            &wine_path(),
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
        .env("GBFRS_SEED", "42")
        .output()
        .unwrap();
    assert!(run.status.success());
    assert_eq!(read_json(&out)["header"]["seed"], 42);
}

#[test]
fn check_passes_on_wine() {
    let run = gbfrs(&["check", "--input", &wine_path(), "--subsets", "10"]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stdout)
    );
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn headerless_input_with_index_label() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.csv");
    fs::write(&input, "a,0.1,0.2\nb,0.9,0.8\na,0.2,0.1\nb,0.8,0.9\n").unwrap();
    let run = gbfrs(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--header",
        "false",
        "--label-col",
        "0",
        "--mode",
        "classic",
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let json: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(json["header"]["dataset"]["d"], 2);
}
