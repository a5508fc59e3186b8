use std::process::{Command, Output};

use ratmin::model::Model;
use serde_json::Value;

fn ratmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratmin")).args(args).output().expect("run ratmin")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let o = ratmin(&a);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn minimize_scaled_map() {
    let v = json(&["minimize", "(7*z^2+49*z+343)/(z^2-7*z+49)"]);
    assert_eq!(v["resultant"].as_str().unwrap().trim_start_matches('-'), "4");
    assert_eq!(v["status"], "EXACT");
    assert_eq!(v["v"], 1);
    let text = stdout(&ratmin(&["minimize", "(7*z^2+49*z+343)/(z^2-7*z+49)"]));
    assert!(text.contains("model: (z^2 + z + 1)/(z^2 - z + 1)"), "{text}");
}

#[test]
fn resultant_and_factorisation() {
    let v = json(&["resultant", "(7*z^2+49*z+343)/(z^2-7*z+49)"]);
    assert_eq!(v["resultant"], "470596");
    assert_eq!(v["factorization"]["factors"], serde_json::json!([["2", 2], ["7", 6]]));
}

#[test]
fn printed_models_reparse() {
    for m in ["(86*z^2 - 1068*z - 338)/(z^2 + 7*z - 338)", "(-54*z^2+16*z+128)/(z^2-41*z+64)", "z^3 + 1024"] {
        let v = json(&["minimize", m]);
        let out = Model::from_json(&v["model"]).unwrap();
        let text = stdout(&ratmin(&["minimize", m]));
        let line = text.lines().find_map(|l| l.strip_prefix("model: ")).unwrap();
        assert_eq!(Model::parse(line).unwrap(), out);
    }
}

#[test]
fn orbit_and_wandering() {
    let v = json(&["orbit", "(86*z^2-1068*z-338)/(z^2+7*z-338)", "--start", "0", "--n", "8"]);
    let pts: Vec<&str> = v["points"].as_array().unwrap().iter().map(|p| p.as_str().unwrap()).collect();
    assert_eq!(pts, ["0", "1", "4", "11", "12", "7", "15", "-374"]);
    assert_eq!(v["integers"], 8);
    let w = json(&["wandering", "(86*z^2-1068*z-338)/(z^2+7*z-338)", "--start", "0"]);
    assert_eq!(w["status"], "CERTIFIED_WANDERING");
    let w = json(&["wandering", "z^2", "--start", "-1"]);
    assert_eq!(w["status"], "PREPERIODIC");
}

#[test]
fn interpolate_and_degenerate() {
    let o = ratmin(&["interpolate", "--d", "3", "0,2,-6,6,-3,3,-9,5"]);
    assert_eq!(o.status.code(), Some(0));
    let m = Model::parse(stdout(&o).trim()).unwrap();
    assert_eq!(m, Model::parse("(7*z^3-41*z^2-216*z+180)/(2*z^3-z^2-21*z+90)").unwrap());
    let o = ratmin(&["interpolate", "--d", "2", "0,1,3,7,15,31"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("DEGENERATE"));
}

#[test]
fn nd_stats_line() {
    let o = ratmin(&["nd-stats", "--d", "2"]);
    assert_eq!(stdout(&o).trim(), "N: 70 terms, max |coeff| 4, deg 9; D: 76 terms, max |coeff| 3, deg 8");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ratmin(&["minimize", "(z^2+"]).status.code(), Some(2));
    assert_eq!(ratmin(&["minimize", "z^2", "--bogus"]).status.code(), Some(2));
    assert_eq!(ratmin(&["nonsense"]).status.code(), Some(2));
    assert_eq!(ratmin(&["interpolate", "--d", "2", "0,1,2"]).status.code(), Some(2));
    assert_eq!(ratmin(&["search", "--d", "2", "--c1", "3..1", "--window", "4"]).status.code(), Some(2));
    assert_eq!(ratmin(&[]).status.code(), Some(2));
    // not a degree-2 map
    assert_eq!(ratmin(&["minimize", "(z^2-1)/(z-1)"]).status.code(), Some(1));
}

#[test]
fn budget_override() {
    // Res_2 = (p1 p2)^2 with two 40-bit primes: needs Pollard rho
    let model = "(z^2)/(1208925820318316616492191)";
    let run = |budget: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ratmin"));
        c.args(["resultant", model, "--json"]);
        if let Some(b) = budget {
            c.env("RATMIN_RHO_BUDGET", b);
        }
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_str::<Value>(&stdout(&o)).unwrap()
    };
    assert!(!run(Some("0"))["factorization"]["unfactored"].as_array().unwrap().is_empty());
    let full = run(None);
    assert!(full["factorization"]["unfactored"].as_array().unwrap().is_empty());
    assert_eq!(full["factorization"]["factors"].as_array().unwrap().len(), 2);
    let bad = Command::new(env!("CARGO_BIN_EXE_ratmin")).args(["resultant", "z^2"]).env("RATMIN_RHO_BUDGET", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn search_writes_layout_and_resumes() {
    let base = ["search", "--d", "2", "--c1", "1..3", "--window", "5"];
    let plain = tempfile::tempdir().unwrap();
    let mut a = base.to_vec();
    a.extend(["--out", plain.path().to_str().unwrap()]);
    assert_eq!(ratmin(&a).status.code(), Some(0));
    for f in ["report.json", "survivors.jsonl", "checkpoints"] {
        assert!(plain.path().join(f).exists(), "{f}");
    }

    let sharded = tempfile::tempdir().unwrap();
    let mut b = base.to_vec();
    b.extend(["--shards", "4", "--threads", "2", "--out", sharded.path().to_str().unwrap()]);
    let mut killed = b.clone();
    killed.extend(["--kill-after", "1:1"]);
    assert_eq!(ratmin(&killed).status.code(), Some(1));
    assert_eq!(ratmin(&b).status.code(), Some(0));
    for f in ["report.json", "survivors.jsonl"] {
        let x = std::fs::read(plain.path().join(f)).unwrap();
        let y = std::fs::read(sharded.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let first = std::fs::read_to_string(plain.path().join("survivors.jsonl")).unwrap();
    let rec: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(rec["v"], 1);
    assert!(rec["c"].is_array() && rec["class"].is_string());
}
