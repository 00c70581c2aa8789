use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(format!("{name}.corec"))
}

fn corec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corec")).args(args).env_remove("COREC_FUEL").output().unwrap()
}

fn showcase(args: &[&str]) -> Output {
    let p = corpus("showcase");
    let mut all = vec![args[0], p.to_str().unwrap()];
    all.extend(&args[1..]);
    corec(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_prints_a_table_and_diagnostics() {
    let o = showcase(&["check"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = |name: &str| out.lines().find(|l| l.split_whitespace().next() == Some(name)).unwrap().split_whitespace().collect::<Vec<_>>();
    assert_eq!(row("filter"), ["filter", "fun", "TransformableUnguarded"]);
    assert_eq!(row("nats"), ["nats", "fun", "RejectedStarStar"]);
    assert_eq!(row("div2"), ["div2", "rec", "Accepted"]);
    assert!(out.contains("`mapinc` (violates condition **)"));
    assert!(out.contains("`log` clause 2"));
}

#[test]
fn strict_check_fails_on_rejections() {
    assert_eq!(showcase(&["check", "--strict"]).status.code(), Some(1));
    assert_eq!(corec(&["check", "--strict", corpus("dyn").to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn check_json_is_the_report() {
    let o = showcase(&["check", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["definitions"].as_array().unwrap().len(), 12);
}

#[test]
fn run_observes_transformed_definitions() {
    let o = showcase(&["run", "--expr", "nth(3, filter(from(0)))"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "6\n");
    // 5 skips to 7 then 9; each produced x continues from x + 1.
    assert_eq!(stdout(&showcase(&["run", "--expr", "take(4, dyn(5))"])), "[9, 12, 15, 18]\n");
    assert_eq!(stdout(&showcase(&["run", "--expr", "take(5, filter(from(0)))"])), "[0, 2, 4, 6, 8]\n");
    assert_eq!(stdout(&showcase(&["run", "--expr", "div2(9)"])), "4\n");
    // ctree(1) = B_node(1, ctree(2), ctree(3)) and ctree(3) = B_node(3, ctree(4), ctree(5)).
    assert_eq!(stdout(&showcase(&["run", "--expr", "fetch([R,L], ctree(1))"])), "A_node 4\n");
}

#[test]
fn run_without_evidence_fails() {
    let o = showcase(&["run", "--expr", "nth(0, filter(repeat(1)))"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn eventually_reports_cycles() {
    let o = showcase(&["eventually", "--fun", "filter", "--args", "repeat(1)"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "NotEventually (cycle: repeat(1))\n");
    let o = showcase(&["eventually", "--fun", "filter", "--args", "from(1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Holds"));
}

#[test]
fn infinite_and_eqcheck() {
    let o = showcase(&["infinite", "--fun", "filter", "--args", "from(0)", "--steps", "10"]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "BoundedVerified (10 steps)\n".into()));
    assert_eq!(showcase(&["infinite", "--fun", "filter", "--args", "repeat(1)"]).status.code(), Some(1));
    let o = showcase(&["eqcheck", "--fun", "filter", "--args", "from(0)", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "Bisimilar");
}

#[test]
fn bisim_compares_streams() {
    assert_eq!(showcase(&["bisim", "--lhs", "filter(from(0))", "--rhs", "filter(filter(from(0)))"]).status.code(), Some(0));
    let o = showcase(&["bisim", "--lhs", "filter(from(0))", "--rhs", "from(0)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("false"));
}

#[test]
fn transform_lists_components() {
    let o = showcase(&["transform", "--fun", "e_filter"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("eventually_e_filter (4 constructors)"));
    assert!(out.contains("ev_e_filter2: clause 2, recurses via e_filter_inv1"));
    assert!(out.contains("e_filter_equation"));
    let o = showcase(&["transform", "--fun", "nats"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("RejectedStarStar"));
}

#[test]
fn emit_writes_script_and_report() {
    let dir = std::env::temp_dir().join(format!("corec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("dyn.v");
    let o = corec(&["emit", corpus("dyn").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/dyn.v")).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("dyn.report.json")).unwrap()).unwrap();
    assert_eq!(report["definitions"][0]["name"], "dyn");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn input_errors_exit_with_two() {
    let o = showcase(&["run", "--expr", "nth(3, nope(1))"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown function `nope`"));
    assert_eq!(corec(&["check", "/nonexistent.corec"]).status.code(), Some(2));
    assert_eq!(showcase(&["run", "--expr", "nth(0, from(0))", "--fuel", "0"]).status.code(), Some(2));
    assert_eq!(showcase(&["eventually", "--fun", "missing"]).status.code(), Some(2));
    assert_eq!(corec(&[]).status.code(), Some(2));
}

#[test]
fn parse_errors_carry_positions() {
    let dir = std::env::temp_dir().join(format!("corec-bad-{}.corec", std::process::id()));
    std::fs::write(&dir, "codata Stream = SCons(nat, #)\nfun f(s: Stream): Stream\n  | SCons(x, t) => SCons(x,\n").unwrap();
    let o = corec(&["check", dir.to_str().unwrap()]);
    std::fs::remove_file(&dir).unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("4:") || stderr(&o).contains("3:"), "{}", stderr(&o));
}

#[test]
fn fuel_can_come_from_the_environment() {
    let p = corpus("showcase");
    let o = Command::new(env!("CARGO_BIN_EXE_corec"))
        .args(["run", p.to_str().unwrap(), "--expr", "nth(200, filter(from(0)))"])
        .env("COREC_FUEL", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fuel"));
}

#[test]
fn json_reports_are_deterministic_and_follow_the_schema() {
    for name in ["showcase", "dyn", "filter", "e_filter"] {
        let p = corpus(name);
        let first = corec(&["check", "--json", p.to_str().unwrap()]);
        let second = corec(&["check", "--json", p.to_str().unwrap()]);
        assert_eq!(first.stdout, second.stdout, "{name}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
        let top: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(top, ["definitions"], "{name}");
        for d in v["definitions"].as_array().unwrap() {
            assert!(d["name"].is_string() && d["kind"].is_string() && d["verdict"].is_string(), "{name}: {d}");
            assert!(d["artifact_names"].is_array());
            for c in d["calls"].as_array().unwrap() {
                assert!(c["clause"].is_u64() && c["path"].is_array() && c["tag"].is_string(), "{name}: {c}");
            }
        }
        let t1 = corec(&["transform", "--json", p.to_str().unwrap()]);
        assert_eq!(t1.stdout, corec(&["transform", "--json", p.to_str().unwrap()]).stdout);
    }
}
