use std::process::{Command, Output};

fn pbridge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbridge")).args(args).output().expect("run pbridge")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/six_class.json");

#[test]
fn enumerate_four_prints_five_trees() {
    let o = pbridge(&["enumerate", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# pbridge "));
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.starts_with('(')));
}

#[test]
fn dynkin_report_has_targets() {
    let o = pbridge(&["verify", "dynkin", "--trials", "400000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let stats = v["report"]["statistics"].as_array().unwrap();
    let get = |name: &str| stats.iter().find(|s| s["name"] == name).unwrap()["value"].as_f64().unwrap();
    assert_eq!(get("target_s1"), 0.25);
    assert_eq!(get("target_s2"), 0.375);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn counterexample_is_rejected() {
    let o = pbridge(&["dds", "check", FIXTURE]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("(C)"));
    let o = pbridge(&["dds", "to-tree", FIXTURE]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[AxiomViolation]"));
}

#[test]
fn dds_round_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("pbridge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("sys.json");
    let o = pbridge(&["dds", "from-tree", "((1,3),(2,4))", "--output", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = pbridge(&["dds", "check", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = pbridge(&["dds", "to-tree", file.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "((1,3),(2,4))");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_jsonl_has_one_line_per_step() {
    let o = pbridge(&["simulate", "--chain", "zigzag-bridge", "--steps", "7", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0]["config"]["chain"], "zigzag-bridge");
    for (k, rec) in lines[1..].iter().enumerate() {
        assert_eq!(rec["n"], k + 1);
        assert_eq!(rec["vertices"].as_array().unwrap().len(), 2 * k + 1);
    }
}

#[test]
fn bridge_from_ends_at_endpoint() {
    let o = pbridge(&["simulate", "--chain", "bridge-from:00,01,10,11", "--format", "newick"]);
    let text = stdout(&o);
    assert_eq!(text.lines().last().unwrap(), "((*,*),(*,*))");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn export_formats() {
    let dot = stdout(&pbridge(&["export", "--tree", "0,10,11"]));
    assert!(dot.starts_with("digraph"));
    let nwk = stdout(&pbridge(&["export", "--tree", "0,10,11", "--format", "newick"]));
    assert_eq!(nwk.trim(), "(*,(*,*))");
    let json = stdout(&pbridge(&["export", "--tree", "((2,1),3)", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["labels"]["00"], 2);
}

#[test]
fn usage_and_data_errors() {
    assert_eq!(pbridge(&[]).status.code(), Some(2));
    assert_eq!(pbridge(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pbridge(&["simulate", "--chain", "nope"]).status.code(), Some(2));
    assert_eq!(pbridge(&["heights", "--chain", "remy", "--n-list", "x"]).status.code(), Some(2));
    let o = pbridge(&["enumerate", "--n", "13"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[TooLarge]"));
    let o = pbridge(&["simulate", "--chain", "patricia", "--measure", "bernoulli:2"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(pbridge(&["dds", "check", "/nonexistent.json"]).status.code(), Some(3));
}

#[test]
fn failing_verification_exits_one() {
    let o = pbridge(&["verify", "persistence", "--chain", "zigzag-bridge", "--trials", "20", "--window", "64"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn heights_csv_rows() {
    let o = pbridge(&["heights", "--chain", "zigzag-bridge", "--n-list", "5,9", "--trials", "3", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.contains("heights,5,mean_height,4,"));
    assert!(text.contains("heights,9,height_over_n,"));
}
