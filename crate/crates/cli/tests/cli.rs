use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn efxw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efxw")).args(args).env_remove("EFXW_BUDGET").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn example(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("example.json");
    let out = efxw(&["generate", "example-compat", "--out", path_str(&path)]);
    assert!(out.status.success());
    path
}

#[test]
fn nash_optimum_fails_efx_on_g2() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let alloc = write(&dir, "nash.json", r#"{"bundles": [["g1", "g2"], ["g4"], ["g3"]]}"#);
    let out = efxw(&["check", path_str(&inst), path_str(&alloc)]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("a3 envies a1 without g2: 1 < 2"), "{text}");

    let out = efxw(&["check", path_str(&inst), path_str(&alloc), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["witness"]["dropped_good"], "g2");
    assert_eq!(doc["format_version"], 1);
}

#[test]
fn singleton_allocation_passes() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "square.json",
        r#"{"agents": ["a1", "a2"], "goods": ["g1", "g2"], "valuations": [["3", "1"], ["2", "7/2"]]}"#,
    );
    let alloc = write(&dir, "single.json", r#"{"bundles": [["g2"], ["g1"]]}"#);
    for notion in ["efx", "efx0"] {
        let out = efxw(&["check", path_str(&inst), path_str(&alloc), "--notion", notion]);
        assert_eq!(out.status.code(), Some(0), "{notion}");
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let bad = write(&dir, "bad.json", r#"{"bundles": [["g1"]"#);
    assert_eq!(efxw(&["check", path_str(&inst), path_str(&bad)]).status.code(), Some(2));
    let bad_inst = write(&dir, "bad_inst.json", r#"{"agents": ["a1"], "goods": ["g1"], "valuations": [["-1"]]}"#);
    assert_eq!(efxw(&["solve", path_str(&bad_inst), "--p", "0"]).status.code(), Some(2));
    assert_eq!(efxw(&["solve", path_str(&inst), "--p", "2"]).status.code(), Some(2));
}

#[test]
fn compat_mode_reports_both_keys() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let out = efxw(&["solve", path_str(&inst), "--p", "0", "--mode", "compat"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "no: optimum 30, best efx 55/2\n");
}

#[test]
fn fewer_goods_than_agents_have_zero_optimum() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "short.json",
        r#"{"agents": ["a1", "a2", "a3"], "goods": ["g1", "g2"], "valuations": [["1", "2"], ["3", "1"], ["2", "2"]]}"#,
    );
    let out = efxw(&["solve", path_str(&inst), "--p", "-1", "--mode", "global", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["status"], "no-positive-welfare");
    assert_eq!(doc["welfare"], "0");

    let out = efxw(&["price", path_str(&inst), "--p", "0", "--format", "csv"]);
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[9], "zero");
}

#[test]
fn nmu_solution_passes_check() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("random.json");
    let alloc = dir.path().join("alloc.json");
    let gen = efxw(&["generate", "random", "--n", "3", "--c", "2", "--seed", "11", "--nmu", "--out", path_str(&inst)]);
    assert!(gen.status.success());
    let out = efxw(&["solve", path_str(&inst), "--p", "1", "--mode", "nmu", "--out", path_str(&alloc)]);
    assert_eq!(out.status.code(), Some(0));
    for notion in ["efx", "efx0"] {
        assert_eq!(efxw(&["check", path_str(&inst), path_str(&alloc), "--notion", notion]).status.code(), Some(0));
    }
}

#[test]
fn example_price_ratio() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    for engine in ["oracle", "solver"] {
        let out = efxw(&["price", path_str(&inst), "--p", "0", "--engine", engine, "--format", "csv"]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "format_version,instance,n,m,c,p,notion,opt,fair,ratio_tag,ratio_decimal");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[9], "finite");
        let ratio: f64 = row[10].parse().unwrap();
        let expected = (30.0f64 / 27.5).powf(1.0 / 3.0);
        assert!((ratio - expected).abs() < 1e-9, "{ratio} vs {expected}");
    }
}

#[test]
fn exact_flag_prints_keys() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let out = efxw(&["price", path_str(&inst), "--p", "0", "--format", "csv", "--exact"]);
    assert!(stdout(&out).contains(",30,55/2,finite,"));
}

#[test]
fn budget_exhaustion_exits_3() {
    let dir = TempDir::new().unwrap();
    let inst = example(&dir);
    let out = efxw(&["oracle", path_str(&inst), "--p", "1", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_efxw"))
        .args(["price", path_str(&inst), "--p", "1"])
        .env("EFXW_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn generation_is_byte_identical() {
    for args in [
        vec!["generate", "example-compat"],
        vec!["generate", "random", "--n", "4", "--c", "3", "--seed", "7"],
        vec!["generate", "hoarding", "--n", "5", "--c", "2", "--eps", "1/1000000"],
        vec!["generate", "private-shared", "--n", "4", "--c", "2", "--eps", "1/10000"],
        vec!["generate", "partition-gadget", "--weights", "1,2,3", "--split", "2"],
    ] {
        let a = efxw(&args);
        let b = efxw(&args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn gadget_witness_is_fair() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("gadget.json");
    let witness = dir.path().join("witness.json");
    let out = efxw(&[
        "generate",
        "partition-gadget",
        "--weights",
        "1,2,3",
        "--split",
        "2",
        "--out",
        path_str(&inst),
        "--witness",
        path_str(&witness),
    ]);
    assert!(out.status.success());
    for notion in ["efx", "efx0"] {
        assert_eq!(efxw(&["check", path_str(&inst), path_str(&witness), "--notion", notion]).status.code(), Some(0));
    }
}

#[test]
fn sweep_rows_respect_surplus_bound() {
    let out = efxw(&["sweep", "random", "--n", "2,3,4", "--c", "0,1,2,3", "--p", "0,-1,-2", "--count", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.join(","), "format_version,instance,n,m,c,p,notion,opt,fair,ratio_tag,ratio_decimal");
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        let c: f64 = record[4].parse().unwrap();
        match &record[9] {
            "finite" => {
                let ratio: f64 = record[10].parse().unwrap();
                assert!(ratio <= 1.0 + c + 1e-9, "{record:?}");
            }
            "zero" => {}
            other => panic!("unexpected ratio tag {other} in {record:?}"),
        }
        rows += 1;
    }
    assert_eq!(rows, 3 * 4 * 2 * 3);
}

#[test]
fn sweep_append_keeps_one_header() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rows.csv");
    for _ in 0..2 {
        let run = efxw(&["sweep", "example-compat", "--p", "0", "--out", path_str(&out), "--append"]);
        assert!(run.status.success());
    }
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text.lines().filter(|l| l.starts_with("format_version")).count(), 1);
}
