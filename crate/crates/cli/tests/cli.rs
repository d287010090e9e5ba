use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn kthstop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kthstop")).args(args).env_remove("KTHSTOP_NMAX_EXACT").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fraction(v: &Value) -> (String, String) {
    (v["num"].as_str().unwrap().to_string(), v["den"].as_str().unwrap().to_string())
}

#[test]
fn solve_reports_value_and_stop_sets() {
    let v = json(&kthstop(&["solve", "-n", "13", "--k", "3"]));
    assert_eq!(v["schema"], "kthstop/1");
    assert_eq!(fraction(&v["value"]), ("13457".into(), "51480".into()));
    let policy = v["policy"].as_array().unwrap();
    assert_eq!(policy[5], serde_json::json!([]));
    assert_eq!(policy[6], serde_json::json!([2]));
    assert_eq!(policy[8], serde_json::json!([2, 3]));

    let v = json(&kthstop(&["solve", "-n", "3", "--k", "1"]));
    assert_eq!(fraction(&v["value"]), ("1".into(), "2".into()));
    let v = json(&kthstop(&["solve", "-n", "5", "--gamma", "1,2"]));
    assert_eq!(fraction(&v["value"]), ("7".into(), "10".into()));
}

#[test]
fn thresholds_match_known_values() {
    let v = json(&kthstop(&["thresholds", "-n", "13"]));
    assert_eq!((v["a"].as_u64(), v["b"].as_u64()), (Some(7), Some(9)));
    assert_eq!(fraction(&v["u"]), ("15797".into(), "180".into()));
    assert_eq!(json(&kthstop(&["thresholds", "-n", "3"]))["b"], 3);
    let v = json(&kthstop(&["thresholds", "-n", "100"]));
    assert!(v["a"].as_u64() < v["b"].as_u64());
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| kthstop(args).status.code().unwrap();
    assert_eq!(code(&["solve", "-n", "3"]), 2);
    assert_eq!(code(&["solve", "-n", "3", "--k", "x"]), 2);
    assert_eq!(code(&["solve", "-n", "3", "--k", "4"]), 3);
    assert_eq!(code(&["thresholds", "-n", "2"]), 3);
    assert_eq!(code(&["simulate", "-n", "5", "--k", "1", "--policy", "/no/such/file", "--trials", "5"]), 4);
    assert_eq!(code(&["export", "pkn", "--nmax", "3", "--out", "/no/such/dir/p.csv"]), 5);

    let out = kthstop(&["simulate", "-n", "100", "--k", "3", "--policy", "tau3", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty simulation"));
}

#[test]
fn simulation_is_reproducible_and_accurate() {
    let args = ["simulate", "-n", "100", "--k", "3", "--policy", "tau3", "--trials", "200000", "--seed", "42"];
    let first = kthstop(&args);
    let second = kthstop(&args);
    assert_eq!(first.stdout, second.stdout);
    let v = json(&first);
    assert_eq!(v["trials"], 200000);
    assert!(v["z_score"].as_f64().unwrap() < 4.0);
}

#[test]
fn policy_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("p.json");
    fs::write(&good, r#"{"n":3,"accept":[[],[1],[1,2,3]]}"#).unwrap();
    let v =
        json(&kthstop(&["simulate", "-n", "3", "--k", "1", "--policy", good.to_str().unwrap(), "--trials", "1000"]));
    assert_eq!(fraction(&v["exact"]), ("1".into(), "2".into()));

    let partial_last = dir.path().join("bad.json");
    fs::write(&partial_last, r#"{"n":3,"accept":[[],[1],[1]]}"#).unwrap();
    let out =
        kthstop(&["simulate", "-n", "3", "--k", "1", "--policy", partial_last.to_str().unwrap(), "--trials", "10"]);
    assert_eq!(out.status.code(), Some(3));

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "not json").unwrap();
    let out = kthstop(&["simulate", "-n", "3", "--k", "1", "--policy", garbage.to_str().unwrap(), "--trials", "10"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = kthstop(&["verify", "remark31", "--nmax", "50", "--out-dir", d]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("remark31.json")).unwrap()).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 10);
    assert_eq!(v["passed"], true);

    assert_eq!(kthstop(&["verify", "theorem21", "--from", "3", "--to", "100", "--out-dir", d]).status.code(), Some(0));
    assert_eq!(kthstop(&["verify", "theorem33", "-n", "10", "-c", "3", "--out-dir", d]).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("theorem33.csv")).unwrap();
    assert!(csv.contains("1 2 3") && csv.contains("8 9 10"));
    assert!(!csv.contains('\r'));
    for suite in ["theorem31", "theorem32", "lemmas", "convergence"] {
        assert_eq!(kthstop(&["verify", suite, "--out-dir", d]).status.code(), Some(0), "{suite}");
        assert!(dir.path().join(format!("{suite}.csv")).exists());
    }
    assert_eq!(kthstop(&["verify", "nope", "--out-dir", d]).status.code(), Some(2));
}

#[test]
fn exact_cutoff_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let read = || -> Value {
        serde_json::from_str(&fs::read_to_string(dir.path().join("convergence.json")).unwrap()).unwrap()
    };
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_kthstop"));
        cmd.args(["verify", "convergence", "--points", "100,500", "--out-dir", d]);
        if let Some(f) = flag {
            cmd.args(["--nmax-exact", f]);
        }
        match env {
            Some(e) => cmd.env("KTHSTOP_NMAX_EXACT", e),
            None => cmd.env_remove("KTHSTOP_NMAX_EXACT"),
        };
        assert!(cmd.status().unwrap().success());
        let v = read();
        v["rows"].as_array().unwrap().iter().map(|r| r["exact"].as_bool().unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run(None, None), [true, true]);
    assert_eq!(run(Some("200"), None), [true, false]);
    assert_eq!(run(Some("200"), Some("1000")), [true, true]);
}

#[test]
fn pkn_export() {
    let out = kthstop(&["export", "pkn", "--nmax", "20", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,k,p_num,p_den,p_decimal"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 210);
    assert!(rows.iter().any(|r| r[..4] == ["5", "2", "3", "10"]));
    let find = |n: usize, k: usize| {
        rows.iter().find(|r| r[0] == n.to_string() && r[1] == k.to_string()).unwrap()[2..4].to_vec()
    };
    for n in 1..=20 {
        for k in 1..=n {
            assert_eq!(find(n, k), find(n, n + 1 - k));
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pkn.json");
    let out = kthstop(&["export", "pkn", "--nmax", "6", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["schema"], "kthstop/1");
    assert_eq!(v["rows"].as_array().unwrap().len(), 21);
}

#[test]
fn other_exports() {
    let out = kthstop(&["export", "thresholds", "--nmax", "13"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().starts_with("13,6,7,7,9,15797,180,"));
    assert_eq!(text.lines().count(), 12);
    let out = kthstop(&["export", "convergence", "--nmax", "40", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 38);
}
