use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use survfuse::Seed;
use survfuse_bench::{generate_model, SimModel};
use tempfile::TempDir;

fn survfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_survfuse")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Model B sample as CSV; `z3` is written by level name.
fn write_data(dir: &Path, name: &str, n: usize, seed: u64, status: &str) -> PathBuf {
    let data = generate_model(SimModel::B, n, 0.3, Seed(seed));
    let levels = ["A", "B", "C", "D", "E"];
    let mut csv = format!("id,time,{status},z1,z2,z3,z4,z5,z6,z7\n");
    for i in 0..data.len() {
        let z = data.covariates(i);
        csv.push_str(&format!(
            "{i},{},{},{},{},{},{},{},{},{}\n",
            data.time(i),
            u8::from(data.event(i)),
            z[0],
            z[1],
            levels[z[2] as usize],
            z[3],
            z[4],
            z[5],
            z[6]
        ));
    }
    let path = dir.join(name);
    fs::write(&path, csv).unwrap();
    path
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        "# model B covariates\n\
         time = time\nstatus = status\n\
         covariate.z1 = binary\ncovariate.z2 = continuous\ncovariate.z3 = nominal:A,B,C,D,E\n\
         covariate.z4 = binary\ncovariate.z5 = binary\ncovariate.z6 = continuous\ncovariate.z7 = continuous\n\
         seed = 11\nbootstrap = 3\n{extra}"
    );
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path
}

fn fit(dir: &Path, data: &Path, out: &str, extra: &[&str]) -> Output {
    let config = write_config(dir, "");
    let out = dir.join(out);
    let mut args = vec!["fit", "--config", config.to_str().unwrap(), "--input", data.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    survfuse(&args)
}

const ARTIFACTS: [&str; 4] = ["model.json", "selection_report.csv", "group_summary.csv", "km_curves.csv"];

#[test]
fn small_fit_writes_all_artifacts() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "small.csv", 40, 1, "status");
    let out = fit(dir.path(), &data, "out", &["--selection", "cv:5", "--set", "min_node_size=10", "--set", "min_child_size=5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for a in ARTIFACTS {
        assert!(dir.path().join("out").join(a).is_file(), "{a} missing");
    }
    let summary = fs::read_to_string(dir.path().join("out/group_summary.csv")).unwrap();
    assert!(summary.starts_with("group,n,events,beta,"));
    let km = fs::read_to_string(dir.path().join("out/km_curves.csv")).unwrap();
    assert!(km.starts_with("group,time,survival\n1,0,1\n"));
}

#[test]
fn fits_are_byte_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "d.csv", 300, 2, "status");
    let a = fit(dir.path(), &data, "a", &["--threads", "1"]);
    let b = fit(dir.path(), &data, "b", &["--threads", "3"]);
    assert!(a.status.success() && b.status.success(), "{}{}", stderr(&a), stderr(&b));
    for name in ARTIFACTS {
        let x = fs::read(dir.path().join("a").join(name)).unwrap();
        let y = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn missing_status_column_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "d.csv", 60, 3, "dead");
    let out = fit(dir.path(), &data, "out", &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("status"), "{}", stderr(&out));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "d.csv", 60, 4, "status");
    let bad_key = fit(dir.path(), &data, "out", &["--set", "depth=3"]);
    assert_eq!(bad_key.status.code(), Some(2));
    assert!(stderr(&bad_key).contains("depth"));
    let bad_selection = fit(dir.path(), &data, "out", &["--selection", "lasso"]);
    assert_eq!(bad_selection.status.code(), Some(2));
    let no_test = fit(dir.path(), &data, "out", &["--selection", "test"]);
    assert_eq!(no_test.status.code(), Some(2));
}

#[test]
fn prediction_replays_training_assignments() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "d.csv", 400, 5, "status");
    assert!(fit(dir.path(), &data, "m", &["--selection", "bic"]).status.success());
    let model_path = dir.path().join("m/model.json");
    let pred = dir.path().join("pred.csv");
    let out = survfuse(&["predict", "--model", model_path.to_str().unwrap(), "--input", data.to_str().unwrap(), "--output", pred.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model_path).unwrap()).unwrap();
    let nodes = model["tree"]["nodes"].as_array().unwrap();
    let text = fs::read_to_string(&pred).unwrap();
    let mut counts = std::collections::BTreeMap::<u64, usize>::new();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let leaf: u64 = cells[1].parse().unwrap();
        let group: u64 = cells[2].parse().unwrap();
        let node = nodes.iter().find(|n| n["id"] == leaf).unwrap();
        assert_eq!(node["group"].as_u64(), Some(group));
        *counts.entry(leaf).or_default() += 1;
    }
    for n in nodes.iter().filter(|n| n.get("split").is_none()) {
        let id = n["id"].as_u64().unwrap();
        assert_eq!(counts.get(&id).copied().unwrap_or(0) as u64, n["n"].as_u64().unwrap(), "leaf {id}");
    }

    let summary = survfuse(&["summarize", "--model", model_path.to_str().unwrap(), "--input", data.to_str().unwrap()]);
    assert!(summary.status.success());
    let printed = String::from_utf8_lossy(&summary.stdout);
    assert!(printed.contains("root") && printed.contains("median_survival"));
}

#[test]
fn boundary_values_route_left() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "d.csv", 400, 6, "status");
    assert!(fit(dir.path(), &data, "m", &["--selection", "bic", "--bootstrap", "0"]).status.success());
    let model_path = dir.path().join("m/model.json");
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model_path).unwrap()).unwrap();
    let root = model["tree"]["nodes"].as_array().unwrap().iter().find(|n| n["id"] == 1).unwrap().clone();
    let split = &root["split"];
    assert_eq!(split["kind"], "threshold", "root split of this sample is on a continuous covariate");
    let var = split["variable"].as_u64().unwrap() as usize;
    let cutoff = split["cutoff"].as_f64().unwrap();
    let mut z = ["0", "0.5", "A", "0", "0", "0.5", "0.5"].map(String::from);
    z[var] = format!("{cutoff}");
    let rows = dir.path().join("edge.csv");
    fs::write(&rows, format!("z1,z2,z3,z4,z5,z6,z7\n{}\n", z.join(","))).unwrap();
    let out = survfuse(&["predict", "--model", model_path.to_str().unwrap(), "--input", rows.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let line = String::from_utf8_lossy(&out.stdout).lines().nth(1).unwrap().to_string();
    let mut leaf: u64 = line.split(',').nth(1).unwrap().parse().unwrap();
    while leaf > 3 {
        leaf /= 2;
    }
    assert_eq!(leaf, 2, "boundary record should descend from the left child");
}

#[test]
fn root_only_model_puts_everyone_in_group_one() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "d.csv", 100, 7, "status");
    let out = fit(dir.path(), &data, "m", &["--selection", "aic", "--set", "max_depth=0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let model_path = dir.path().join("m/model.json");
    let pred = survfuse(&["predict", "--model", model_path.to_str().unwrap(), "--input", data.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&pred.stdout);
    assert_eq!(text.lines().count(), 101);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1,1,1")));
}

#[test]
fn prediction_needs_every_schema_column() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), "d.csv", 100, 8, "status");
    assert!(fit(dir.path(), &data, "m", &["--selection", "aic", "--bootstrap", "0"]).status.success());
    let rows = dir.path().join("partial.csv");
    fs::write(&rows, "z1,z2\n1,0.5\n").unwrap();
    let out = survfuse(&["predict", "--model", dir.path().join("m/model.json").to_str().unwrap(), "--input", rows.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("z3"));
}

#[test]
fn simulate_smoke_and_unknown_model() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("sim");
    let out = survfuse(&["simulate", "--models", "A", "--replicates", "5", "--selection", "bic", "--output", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
    assert!(out_dir.join("replicates_A.csv").is_file());
    let bad = survfuse(&["simulate", "--models", "Q", "--output", out_dir.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}
