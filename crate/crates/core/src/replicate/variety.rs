//! Scenarios decided on free algebras and clones of two-element generators.

use std::collections::BTreeSet;

use super::Sheet;
use crate::algebra::{Algebra, Operation};
use crate::baker::{baker_instance, Signature};
use crate::error::Result;
use crate::lattice::{c2b, c2lat, c2median, c2u, ReductSpec};
use crate::relation::{BinRel, IdentityStatement, Role};
use crate::variety::{
    absorption_check, arithmetic_violation, arithmeticity_probe, classify_boolean_reduct, find_term, free_algebra,
    modularity_level, modularity_statement, principal_congruences, spectrum, variety_congruence_check,
    variety_relation_check, TermSearchKind, VarietyVerdict,
};

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

fn decide(a: &Algebra, stmt: &IdentityStatement, n: usize) -> Result<VarietyVerdict> {
    if stmt.roles.values().all(|&r| r == Role::Congruence) {
        variety_congruence_check(a, stmt, n)
    } else {
        variety_relation_check(a, stmt, n)
    }
}

/// Decides `stmt` over the variety of `a` and records one row. Rows whose
/// chain length `n` is above `limit` are skipped, as are resource failures.
#[allow(clippy::too_many_arguments)]
pub(super) fn identity_row(
    sheet: &mut Sheet,
    name: &str,
    a: &Algebra,
    stmt: &str,
    roles: &str,
    n: usize,
    expect: bool,
    limit: usize,
) -> Result<Option<bool>> {
    let label = format!("{}: {name}", a.name);
    if n > limit {
        sheet.skip(label, verdict(expect), format!("variety-level checks run up to n = {limit}"));
        return Ok(None);
    }
    let parsed = IdentityStatement::parse(stmt, roles)?;
    match decide(a, &parsed, n) {
        Ok(v) => {
            let computed = match &v.witness {
                Some((x, y)) if v.holds != expect => format!("fails at ({x}, {y})"),
                _ => verdict(v.holds).to_string(),
            };
            sheet.check(label, verdict(expect), computed, v.holds == expect);
            Ok(Some(v.holds))
        }
        Err(e) if e.is_resource() => {
            sheet.skip(label, verdict(expect), e.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Least `k` in `range` for which `stmt(k)` holds.
fn least_holding(
    a: &Algebra,
    range: std::ops::RangeInclusive<usize>,
    roles: &str,
    stmt: impl Fn(usize) -> String,
) -> Result<Option<usize>> {
    for k in range {
        let parsed = IdentityStatement::parse(&stmt(k), roles)?;
        if variety_relation_check(a, &parsed, 2)?.holds {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

pub(super) fn dm(sheet: &mut Sheet, sig: Signature) -> Result<()> {
    let a = sig.generator();
    let s = spectrum(&a, 2, 8)?;
    sheet.eq(format!("{}: least k with alpha(beta o gamma) in alpha-beta o_k alpha-gamma", a.name), Some(4), s.level);
    let m = modularity_level(&a, 8)?;
    sheet.eq(format!("{}: least Day identity length", a.name), Some(5), m.level);
    sheet.value("spectrum_2", s.level);
    sheet.value("modularity_level", m.level);
    sheet.value("free_size", s.free_size);
    Ok(())
}

pub(super) fn rm(sheet: &mut Sheet, sig: Signature) -> Result<()> {
    let a = sig.generator();
    let level = modularity_level(&a, 8)?.level;
    sheet.eq(format!("{}: least Day identity length", a.name), Some(5), level);
    sheet.value("modularity_level", level);
    let floor = level.unwrap_or(usize::MAX);

    let square = least_holding(&a, 1..=6, "al:cong,r:adm", |k| format!("meet(al,comp(r,r)) <= pow(meet(al,r),{k})"))?;
    let want = if sig == Signature::B { 4 } else { 3 };
    sheet.eq("least k with alpha(R o R) in (alpha R)^k", Some(want), square);
    sheet.value("k_square", square);
    if let Some(k) = square {
        let holds = variety_congruence_check(&a, &modularity_statement(2 * k), 3)?.holds;
        sheet.eq(format!("{}-modular", 2 * k), "holds", verdict(holds));
        sheet.check("consistent with the Day level", format!(">= {floor}"), 2 * k, 2 * k >= floor);
        let stmt = format!("meet(al,alt(be,meet(al,ga),4)) <= alt(meet(al,be),meet(al,ga),{})", 2 * k);
        identity_row(sheet, &stmt, &a, &stmt, "al:cong,be:cong,ga:cong", 4, true, usize::MAX)?;
    }

    let mixed = least_holding(&a, 2..=6, "al:cong,r:adm,s:adm", |k| {
        format!("meet(al,comp(r,s)) <= comp(meet(al,r),pow(meet(al,adm(r,s)),{}))", k - 1)
    })?;
    match sig {
        Signature::U => sheet.eq("least k with alpha(R o S) in alpha R o (alpha adm(R,S))^(k-1)", Some(3), mixed),
        Signature::B => sheet.check(
            "least k with alpha(R o S) in alpha R o (alpha adm(R,S))^(k-1)",
            ">= 3",
            mixed,
            mixed.is_some_and(|k| k >= 3),
        ),
    }
    sheet.value("k_mixed", mixed);
    if let Some(k) = mixed {
        let holds = variety_congruence_check(&a, &modularity_statement(2 * k - 1), 3)?.holds;
        sheet.eq(format!("{}-modular", 2 * k - 1), "holds", verdict(holds));
        sheet.check("consistent with the Day level", format!(">= {floor}"), 2 * k - 1, 2 * k - 1 >= floor);
    }
    Ok(())
}

pub(super) fn sch(sheet: &mut Sheet, n: usize, opts: &super::RunOptions) -> Result<()> {
    let a = c2u();
    let limit = opts.variety_max_n;
    let bound = if n % 2 == 0 { 2 * n } else { 2 * n - 1 };
    let cong = format!("meet(al,alt(be,ga,{n})) <= alt(meet(al,be),meet(al,ga),{bound})");
    // congruence-only identities stay cheap on F(n+1), so they are not gated
    identity_row(sheet, &cong, &a, &cong, "al:cong,be:cong,ga:cong", n, true, usize::MAX)?;
    let pow = format!("meet(th,pow(r,{n})) <= pow(meet(th,r),{})", 2 * n - 1);
    identity_row(sheet, &pow, &a, &pow, "th:tol,r:adm", n, true, limit)?;
    let rs: Vec<String> = (1..=n).map(|i| format!("r{i}")).collect();
    let mut right: Vec<String> = rs[..n - 1].iter().map(|r| format!("meet(th,{r})")).collect();
    right.push(format!("meet(th,adm(r{n},r1))"));
    right.extend(rs[1..].iter().map(|r| format!("meet(th,{r})")));
    let merged = format!("meet(th,comp({})) <= comp({})", rs.join(","), right.join(","));
    let roles = std::iter::once("th:tol".to_string())
        .chain(rs.iter().map(|r| format!("{r}:adm")))
        .collect::<Vec<_>>()
        .join(",");
    identity_row(sheet, &merged, &a, &merged, &roles, n, true, limit)?;
    Ok(())
}

pub(super) fn edge(sheet: &mut Sheet) -> Result<()> {
    let a = c2u();
    let term = find_term(&a, TermSearchKind::Edge { k: 4 })?;
    sheet.eq("4-edge term", true, term.is_some());
    if let Some(t) = term {
        sheet.value("edge_term", t.term.to_string());
    }
    let e1 = "meet(th,comp(r,r)) <= pow(meet(th,r),3)";
    identity_row(sheet, e1, &a, e1, "th:tol,r:adm", 2, true, usize::MAX)?;
    let e2 = "meet(th,comp(r,s)) <= comp(meet(th,r),pow(meet(th,adm(r,s)),2))";
    identity_row(sheet, e2, &a, e2, "th:tol,r:adm,s:adm", 2, true, usize::MAX)?;
    Ok(())
}

pub(super) fn fv3(sheet: &mut Sheet) -> Result<()> {
    let (b, u) = (c2b(), c2u());
    let fb = free_algebra(&b, 3)?;
    let fu = free_algebra(&u, 3)?;
    let set = |f: &crate::variety::FreeAlgebra| -> BTreeSet<Vec<u32>> {
        (0..f.len() as u32).map(|i| f.element(i).to_vec()).collect()
    };
    sheet.eq("|F(3)| for b", 10, fb.len());
    sheet.eq("|F(3)| for u", 10, fu.len());
    let equal = set(&fb) == set(&fu);
    sheet.eq("same ternary term operations", true, equal);
    let f2 = free_algebra(&b, 2)?;
    sheet.eq("|F(2)| for b", 3, f2.len());
    sheet.value("f3_size_b", fb.len());
    sheet.value("f3_size_u", fu.len());
    sheet.value("equal", equal);
    sheet.value("f2_size_b", f2.len());
    let spec = ReductSpec::baker();
    let terms: Vec<String> = (0..fb.len() as u32)
        .map(|i| {
            let t = fb.witness(i);
            spec.expand(&t).map(|l| l.to_string()).unwrap_or_else(|_| t.to_string())
        })
        .collect();
    sheet.value("f3_terms_b", terms);
    Ok(())
}

pub(super) fn no_nu(sheet: &mut Sheet, max_arity: usize) -> Result<()> {
    let a = c2b();
    for k in 2..=max_arity {
        sheet.eq(format!("every {k}-ary term has a coordinate forcing 0"), true, absorption_check(&a, 0, k)?);
    }
    for k in 3..=max_arity {
        let found = find_term(&a, TermSearchKind::Nu { arity: k })?;
        sheet.eq(format!("near-unanimity term of arity {k}"), None, found.map(|t| t.term.to_string()));
    }
    Ok(())
}

/// `(C2, median, x + y mod 2)`: a majority and a Maltsev term.
fn median_xor() -> Result<Algebra> {
    let base = c2median();
    let mut ops = base.operations.clone();
    ops.push(Operation::from_fn("p", 2, 2, |x| x[0] ^ x[1])?);
    Algebra::new("c2median_xor", 2, ops)
}

pub(super) fn majari(sheet: &mut Sheet) -> Result<()> {
    let arith = median_xor()?;
    let probe = arithmeticity_probe(&arith)?;
    sheet.eq("c2median_xor: majority term", true, probe.majority.is_some());
    sheet.eq("c2median_xor: Maltsev term", true, probe.maltsev.is_some());
    sheet.eq("c2median_xor: arithmetic identity violation", None, probe.violation);
    sheet.eq("c2median_xor: probe agreement", true, probe.agreement);

    let b = c2b();
    sheet.eq("c2b: majority term", None, find_term(&b, TermSearchKind::Majority)?.map(|t| t.term.to_string()));
    sheet.eq("c2b: Maltsev term", None, find_term(&b, TermSearchKind::Maltsev)?.map(|t| t.term.to_string()));

    let inst = baker_instance(2, Signature::B, false)?;
    let size = inst.size();
    let mut cons = vec![BinRel::diagonal(size), BinRel::full(size), inst.alpha.clone(), inst.beta.clone(), inst.gamma.clone()];
    let mut found = arithmetic_violation(&inst.algebra, &cons)?;
    if found.is_none() {
        cons.extend(principal_congruences(&inst.algebra)?);
        cons.dedup();
        found = arithmetic_violation(&inst.algebra, &cons)?;
    }
    sheet.check(
        format!("{}: arithmetic identity violation", inst.algebra.name),
        "found",
        found.map_or("none".to_string(), |v| format!("{v:?}")),
        found.is_some(),
    );
    sheet.value("congruences_searched", cons.len());
    Ok(())
}

pub(super) fn prl3(sheet: &mut Sheet) -> Result<()> {
    // (name, spec, majority, Maltsev, Baker term, near-unanimity arity, Day level);
    // `None` entries are recorded without an expectation
    type Want = (Option<bool>, Option<bool>, Option<bool>, Option<Option<usize>>, Option<Option<usize>>);
    let cases: [(&str, ReductSpec, Want); 4] = [
        ("baker", ReductSpec::baker(), (Some(false), Some(false), Some(true), Some(None), Some(Some(5)))),
        ("median", ReductSpec::median(), (Some(true), None, None, Some(Some(3)), None)),
        ("nu4", ReductSpec::nu4(), (Some(false), Some(false), None, Some(Some(4)), Some(Some(5)))),
        ("meet_only", ReductSpec::meet_only(), (Some(false), Some(false), Some(false), Some(None), Some(None))),
    ];
    for (name, spec, (majority, maltsev, baker_b, nu, level)) in cases {
        let r = classify_boolean_reduct(&spec)?;
        let nu_found = r.near_unanimity.as_ref().map(|x| x.0);
        let mut row = |label: &str, want: Option<serde_json::Value>, got: serde_json::Value| match want {
            Some(w) => {
                let ok = w == got;
                sheet.check(format!("{name}: {label}"), w, got, ok);
            }
            None => sheet.value(&format!("{name}_{}", label.replace(' ', "_")), got),
        };
        use serde_json::json;
        row("majority", majority.map(|x| json!(x)), json!(r.majority.is_some()));
        row("maltsev", maltsev.map(|x| json!(x)), json!(r.maltsev.is_some()));
        row("baker term", baker_b.map(|x| json!(x)), json!(r.baker_b.is_some()));
        row("least near-unanimity arity", nu.map(|x| json!(x)), json!(nu_found));
        row("day level", level.map(|x| json!(x)), json!(r.modularity_level));
        sheet.eq(format!("{name}: consistent"), true, r.consistent);
    }
    Ok(())
}

pub(super) fn fact(sheet: &mut Sheet) -> Result<()> {
    let lat = c2lat();
    let two = "meet(t,comp(r,s)) <= comp(meet(t,r),meet(t,s))";
    identity_row(sheet, two, &lat, two, "t:adm,r:adm,s:adm", 2, true, usize::MAX)?;
    let three = "meet(t,comp(r1,r2,r3)) <= comp(meet(t,r1),meet(t,r2),meet(t,r3))";
    identity_row(sheet, three, &lat, three, "t:adm,r1:adm,r2:adm,r3:adm", 3, true, usize::MAX)?;
    identity_row(sheet, two, &c2b(), two, "t:adm,r:adm,s:adm", 2, false, usize::MAX)?;
    let four = "meet(comp(r1,r2),comp(r3,r2),comp(r1,r3)) <= comp(meet(r1,r3),meet(r1,r2),meet(r1,r2),meet(r2,r3))";
    identity_row(sheet, four, &c2median(), four, "r1:adm,r2:adm,r3:adm", 2, true, usize::MAX)?;
    Ok(())
}
