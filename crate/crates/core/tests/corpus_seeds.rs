//! Replays the checked-in fuzz corpus through the same entry points.

use std::path::PathBuf;

use unialg::relation::{parse_expr, parse_roles, parse_statement};
use unialg::{Algebra, BinRel};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn expression_seeds_round_trip() {
    for (name, text) in seeds("parse_expr") {
        let e = parse_expr(&text).unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{name}");
    }
}

#[test]
fn statement_and_role_seeds_parse() {
    for (name, text) in seeds("parse_stmt") {
        parse_statement(&text).unwrap_or_else(|err| panic!("{name}: {err}"));
    }
    for (name, text) in seeds("parse_roles") {
        parse_roles(&text).unwrap_or_else(|err| panic!("{name}: {err}"));
    }
}

#[test]
fn json_seeds_round_trip() {
    for (name, text) in seeds("algebra_json") {
        let a = Algebra::from_json(&text).unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(Algebra::from_json(&a.to_json()).unwrap(), a);
    }
    for (name, text) in seeds("relation_json") {
        let r = BinRel::from_json(&text).unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(BinRel::from_json(&r.to_json()).unwrap(), r);
    }
}
