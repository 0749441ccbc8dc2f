use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use degree_tool::{emit_scenario, parse_scenario};
use serde_json::Value;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn shipped() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degree-tool")).args(args).output().unwrap()
}

fn run_into(name: &str, dir: &Path, extra: &[&str]) -> (i32, Value) {
    let path = scenarios_dir().join(format!("{name}.json"));
    let mut args = vec!["run", path.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = tool(&args);
    let report = std::fs::read_to_string(dir.join(format!("{name}.report.json"))).unwrap();
    (out.status.code().unwrap(), serde_json::from_str(&report).unwrap())
}

#[test]
fn every_shipped_scenario_round_trips() {
    let files = shipped();
    assert!(files.len() >= 20);
    for f in files {
        let s = parse_scenario(&std::fs::read(&f).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let again = parse_scenario(emit_scenario(&s).as_bytes()).unwrap();
        assert_eq!(again, s, "{}", f.display());
        assert_eq!(emit_scenario(&again), emit_scenario(&s));
    }
}

#[test]
fn validate_accepts_shipped_and_rejects_bad_files() {
    for f in shipped() {
        let out = tool(&["validate", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"schema\": 1,\n  \"name\": \"x\" \"space\"\n}").unwrap();
    let out = tool(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let typo = dir.path().join("typo.json");
    std::fs::write(
        &typo,
        r#"{"schema": 1, "name": "t", "space": {"p_x": 2, "p_y": 2}, "operator": {"name": "duality"},
            "domain": {"ball": {"radius": 1}}, "schedule": {"epsilonn": 0.1}}"#,
    )
    .unwrap();
    let out = tool(&["validate", typo.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schedule.epsilonn"));

    let missing = tool(&["run", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn gallery_list_names_every_member() {
    let out = tool(&["gallery", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["duality", "diag", "sign", "shifted", "capped_normal_cone", "cubic", "sum"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn exit_codes_and_report_keys() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_into("duality_l2", dir.path(), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["value"], 1);
    assert!(r["error"].is_null());
    assert_eq!(r["scenario"]["name"], "duality_l2");
    assert!(r["degree"]["diagnostics"]["r_hat"].as_f64().unwrap() > 0.0);

    let (code, r) = run_into("boundary_hits_zero", dir.path(), &[]);
    assert_eq!(code, 2);
    assert_eq!(r["error"], "BoundaryHitsZero");
    assert!(r["value"].is_null());
}

#[test]
fn csv_table_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_into("defigueiredo_diag", dir.path(), &["--seed", "11", "--format", "json+csv"]);
    assert_eq!(code, 0);
    assert_eq!(r["seed"], 11);
    let csv = std::fs::read_to_string(dir.path().join("defigueiredo_diag.report.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,eps_n,degree,boundary_margin"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 4);
        assert_eq!(row[0], (i + 1).to_string());
        assert_eq!(row[2], "1");
        assert!(row[1].parse::<f64>().unwrap() > 0.0 && row[3].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in ["sign_diag_solve", "range_identity_far"] {
        let first = {
            let dir = tempfile::tempdir().unwrap();
            run_into(name, dir.path(), &["--seed", "5"]);
            std::fs::read(dir.path().join(format!("{name}.report.json"))).unwrap()
        };
        for _ in 0..4 {
            let dir = tempfile::tempdir().unwrap();
            run_into(name, dir.path(), &["--seed", "5"]);
            assert_eq!(std::fs::read(dir.path().join(format!("{name}.report.json"))).unwrap(), first, "{name}");
        }
    }
}
