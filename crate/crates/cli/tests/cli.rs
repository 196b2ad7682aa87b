use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pslab"))
        .args(args)
        .current_dir(dir)
        .env_remove("PSLAB_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn stats_csv_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = pslab(dir.path(), &["stats", "--x", "1000000", "--lambda", "1", "--format", "csv", "--out", "h.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert!(csv.starts_with("m,count,frequency,poisson_pmf,abs_error\n0,"));
    let total: u64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 1_000_000);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("h.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "stats");
    assert_eq!(manifest["parameters"]["x"], 1_000_000);
    assert_eq!(manifest["outputs"][0], "h.csv");
}

#[test]
fn admissible_prints_obstruction() {
    let dir = tempfile::tempdir().unwrap();
    let o = pslab(dir.path(), &["admissible", "--offsets", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "not admissible (p=2)\n");
    let o = pslab(dir.path(), &["admissible", "--forms", "1 0; 1 2; 1 6"]);
    assert_eq!(stdout(&o), "admissible\n");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = pslab(dir.path(), &["walk", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--construction"));
    assert_eq!(pslab(dir.path(), &["stats", "--x", "10", "--lambda", "1", "--bogus"]).status.code(), Some(2));
    assert_eq!(pslab(dir.path(), &["stats", "--x", "10", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(pslab(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pslab(dir.path(), &["construct", "--k", "3", "--y", "29", "--z", "200", "--max-attempts", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let o = pslab(dir.path(), &["stats", "--x", "100", "--lambda", "1", "--out", "missing/dir/h.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.json", "b.json"] {
        let o = pslab(dir.path(), &["gaps", "--x", "100000", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("b.json")).unwrap());
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let json: serde_json::Value = serde_json::from_slice(&pslab(dir.path(), &["stats", "--x", "10000", "--lambda", "1"]).stdout).unwrap();
    let csv = stdout(&pslab(dir.path(), &["stats", "--x", "10000", "--lambda", "1", "--format", "csv"]));
    for (row, line) in json["rows"].as_array().unwrap().iter().zip(csv.lines().skip(1)) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(row["m"].to_string(), cells[0]);
        assert_eq!(row["count"].to_string(), cells[1]);
        assert_eq!(row["frequency"].as_f64().unwrap(), cells[2].parse::<f64>().unwrap());
    }
}

#[test]
fn generated_seed_is_recorded_and_replayed() {
    let dir = tempfile::tempdir().unwrap();
    let o = pslab(dir.path(), &["cramer", "--x", "100000", "--lambda", "2", "--out", "m.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("seed: "));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("m.json.manifest.json")).unwrap()).unwrap();
    assert!(manifest["seed"].is_u64());
    let o = pslab(dir.path(), &["replay", "--manifest", "m.json.manifest.json", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("m.json")).unwrap(), fs::read(dir.path().join("r.json")).unwrap());
}

#[test]
fn construct_verify_walk_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let o = pslab(dir.path(), &["construct", "--k", "3", "--y", "29", "--z", "60", "--seed", "7", "--out", "c.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = pslab(dir.path(), &["verify", "--construction", "c.json", "--samples", "10", "--seed", "1", "--format", "text"]);
    assert_eq!(stdout(&o), "10 samples, 0 uncertified positions\n");
    let o = pslab(dir.path(), &["walk", "--construction", "c.json", "--n", "1", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let walk: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(walk["primes_in_window"].as_array().unwrap().len(), 1);
    let o = pslab(dir.path(), &["report", "--construction", "c.json", "--x", "1e6"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["big_x"], "25878772920000000");
}

#[test]
fn sieve_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--cache-dir", "cache", "sieve", "--lo", "0", "--hi", "1000000", "--format", "text"];
    assert_eq!(stdout(&pslab(dir.path(), &args)), "78498\n");
    let cached = dir.path().join("cache/segments-0-1000000.bin");
    assert!(fs::read(&cached).unwrap().starts_with(b"PSLAB001"));
    assert_eq!(stdout(&pslab(dir.path(), &args)), "78498\n");
}
