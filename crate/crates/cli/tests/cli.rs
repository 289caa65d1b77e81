use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unialg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn make_baker(dir: &Path, n: usize, sig: &str) -> (String, String, Value) {
    let out = dir.join(format!("baker{n}{sig}.json"));
    let o = run(&["make-baker", "--n", &n.to_string(), "--sig", sig, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let companion = dir.join(format!("baker{n}{sig}.companion.json"));
    let rels = dir.join(format!("baker{n}{sig}.rels.json"));
    let c: Value = serde_json::from_str(&std::fs::read_to_string(companion).unwrap()).unwrap();
    (out.to_str().unwrap().to_string(), rels.to_str().unwrap().to_string(), c)
}

#[test]
fn spectrum_of_the_baker_generator() {
    let o = run(&["spectrum", "--algebra", "c2b", "--n", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "4");
}

#[test]
fn spectrum_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c2b.json");
    std::fs::write(&path, unialg::lattice::c2b().to_json()).unwrap();
    let o = run(&["spectrum", "--algebra", path.to_str().unwrap(), "--n", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "5");
}

#[test]
fn optimality_check_fails_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let (alg, rels, comp) = make_baker(dir.path(), 2, "u");
    let stmt = "meet(al,alt(be,ga,2)) <= alt(meet(al,be),meet(al,ga),3)";
    let roles = "al:cong,be:cong,ga:cong";
    let o = run(&["check", "--algebra", &alg, "--rels", &rels, "--stmt", stmt, "--roles", roles]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness"));

    // (c0, c2) lies in the left side but not the right one
    let c0 = comp["c"][0].as_u64().unwrap();
    let c2 = comp["c"][2].as_u64().unwrap();
    let lhs = run(&["--json", "eval", "--algebra", &alg, "--rels", &rels, "--expr", "meet(al,alt(be,ga,2))"]);
    let rhs = run(&["--json", "eval", "--algebra", &alg, "--rels", &rels, "--expr", "alt(meet(al,be),meet(al,ga),3)"]);
    let has = |o: &Output| {
        let v: Value = serde_json::from_str(&stdout(o)).unwrap();
        v["pairs"].as_array().unwrap().iter().any(|p| p[0] == c0 && p[1] == c2)
    };
    assert!(has(&lhs));
    assert!(!has(&rhs));

    let four = "meet(al,alt(be,ga,2)) <= alt(meet(al,be),meet(al,ga),4)";
    let o = run(&["--json", "check", "--algebra", &alg, "--rels", &rels, "--stmt", four, "--roles", roles]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["holds"], true);
}

#[test]
fn round_trip_matches_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    for (n, sig) in [(2, "b"), (3, "u")] {
        let (alg, rels, _) = make_baker(dir.path(), n, sig);
        let k = if n % 2 == 0 { 2 * n } else { 2 * n - 1 };
        let stmt = format!("meet(al,alt(be,ga,{n})) <= alt(meet(al,be),meet(al,ga),{k})");
        let o = run(&["check", "--algebra", &alg, "--rels", &rels, "--stmt", &stmt, "--roles", "al:cong,be:cong,ga:cong"]);
        assert_eq!(code(&o), 0, "{n}{sig}: {}", stdout(&o));
        let r = run(&["--json", "replicate", "--scenario", "thm-bds-positive", "--n", &n.to_string(), "--sig", sig]);
        assert_eq!(code(&r), 0);
        let v: Value = serde_json::from_str(&stdout(&r)).unwrap();
        assert_eq!(v[0]["status"], "pass");
    }
}

#[test]
fn role_violations_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (alg, rels, _) = make_baker(dir.path(), 2, "b");
    // Psi is a tolerance, not a congruence
    let o = run(&["check", "--algebra", &alg, "--rels", &rels, "--stmt", "ps <= ps", "--roles", "ps:cong"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ps"));
    assert!(o.stdout.is_empty());
}

#[test]
fn bare_pair_lists_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let rels = dir.path().join("rels.json");
    std::fs::write(&rels, r#"{"r": [[0,1]], "s": {"size": 2, "pairs": [[1,0]]}}"#).unwrap();
    let o = run(&["--json", "eval", "--algebra", "c2lat", "--rels", rels.to_str().unwrap(), "--expr", "comp(r,s)"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pairs"], serde_json::json!([[0, 0]]));
}

#[test]
fn find_term_exit_codes() {
    let o = run(&["find-term", "--algebra", "c2u", "--kind", "nu", "--arity", "4"]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).trim().is_empty());
    let o = run(&["find-term", "--algebra", "c2b", "--kind", "majority"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).trim(), "none");
    let o = run(&["find-term", "--algebra", "c2b", "--kind", "nu", "--arity", "9"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["spectrum", "--algebra", "nowhere.json", "--n", "2"])), 2);
    let o = run(&["variety-check", "--algebra", "c2b", "--stmt", "meet(al,", "--roles", "al:cong", "--n", "2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte"));
    assert_eq!(code(&run(&["replicate", "--scenario", "nope"])), 2);
    assert_eq!(code(&run(&["replicate", "--scenario", "thm-bds-optimal", "--n", "1"])), 2);
}

#[test]
fn variety_check_verdicts() {
    let o = run(&[
        "--json",
        "variety-check",
        "--algebra",
        "c2lat",
        "--stmt",
        "meet(t,comp(r,s)) <= comp(meet(t,r),meet(t,s))",
        "--roles",
        "t:adm,r:adm,s:adm",
        "--n",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["holds"], true);
    let o = run(&[
        "variety-check",
        "--algebra",
        "c2b",
        "--stmt",
        "meet(al,comp(be,ga)) <= alt(meet(al,be),meet(al,ga),3)",
        "--roles",
        "al:cong,be:cong,ga:cong",
        "--n",
        "2",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn listing_and_json_output() {
    let o = run(&["--json", "list-scenarios"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 17);
    let o = run(&["--json", "replicate", "--scenario", "rem-fv3"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let report = &v[0];
    for key in ["id", "params", "status", "details", "elapsed_ms"] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert_eq!(report["details"]["f3_size_b"], 10);
}
