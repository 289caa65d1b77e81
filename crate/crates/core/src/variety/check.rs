//! Identity checks that hold in every member of a variety, decided on a
//! free algebra through a generic witness.
//!
//! The left side must be a meet of conjuncts, each a variable or a chain of
//! factors (`comp`, `alt`, `pow`) whose atoms are variables or meets of
//! variables. The first chain fixes the generators `x0 .. xL`; the other
//! chains get fresh intermediate generators between `x0` and `xL`. A
//! variable is seeded with `(x0, xL)` for each outer occurrence and with the
//! link of every chain position it occurs at, then closed per its role. The
//! identity holds in the variety iff `(x0, xL)` lands in the right side.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{Algebra, Term};
use crate::error::{Error, Result};
use crate::relation::eval::{compare, eval_expr, Env};
use crate::relation::expr::{Mode, RelExpr, Role};
use crate::relation::{BinRel, IdentityStatement, Structure};
use crate::variety::free::{free_algebra, FreeAlgebra};

/// Generator layout read off the left side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericLayout {
    /// Number of generators.
    pub generators: usize,
    /// Length of the first chain; its end generator is `x(main_len)`.
    pub main_len: usize,
    /// Generator pairs seeding each variable.
    pub seeds: BTreeMap<String, Vec<(usize, usize)>>,
}

impl GenericLayout {
    pub fn end(&self) -> usize {
        self.main_len
    }
}

fn unsupported<T>(what: &RelExpr) -> Result<T> {
    Err(Error::UnsupportedShape(format!(
        "`{what}` is outside the supported left-hand shapes (meet of variables and chains of variables or meets of variables)"
    )))
}

/// Variables of one chain factor, or an error for other shapes.
fn atom_vars(e: &RelExpr) -> Result<Vec<String>> {
    match e {
        RelExpr::Var(v) => Ok(vec![v.clone()]),
        RelExpr::Meet(xs) => {
            let mut out = Vec::new();
            for x in xs {
                match x {
                    RelExpr::Var(v) => out.push(v.clone()),
                    RelExpr::Meet(_) => out.extend(atom_vars(x)?),
                    _ => return unsupported(e),
                }
            }
            Ok(out)
        }
        _ => unsupported(e),
    }
}

/// Flattens a chain into its factors; `None` for factors that are the
/// diagonal.
fn chain_factors(e: &RelExpr, out: &mut Vec<Vec<String>>) -> Result<()> {
    match e {
        RelExpr::Diag => Ok(()),
        RelExpr::Comp(xs) => xs.iter().try_for_each(|x| chain_factors(x, out)),
        RelExpr::Alt(a, b, m) => {
            for i in 0..*m {
                chain_factors(if i % 2 == 0 { a } else { b }, out)?;
            }
            Ok(())
        }
        RelExpr::Pow(a, m) => {
            for _ in 0..*m {
                chain_factors(a, out)?;
            }
            Ok(())
        }
        _ => {
            out.push(atom_vars(e)?);
            Ok(())
        }
    }
}

/// Reads the generator layout off a left-hand side.
pub fn generic_layout(lhs: &RelExpr) -> Result<GenericLayout> {
    let conjuncts: Vec<&RelExpr> = match lhs {
        RelExpr::Meet(xs) => xs.iter().collect(),
        e => vec![e],
    };
    let mut outer: Vec<String> = Vec::new();
    let mut chains: Vec<Vec<Vec<String>>> = Vec::new();
    for c in conjuncts {
        match c {
            RelExpr::Var(v) => outer.push(v.clone()),
            RelExpr::Meet(_) => outer.extend(atom_vars(c)?),
            _ => {
                let mut factors = Vec::new();
                chain_factors(c, &mut factors)?;
                if factors.is_empty() {
                    return unsupported(c);
                }
                chains.push(factors);
            }
        }
    }
    let main_len = chains.first().map_or(1, Vec::len);
    let mut seeds: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    for v in &outer {
        seeds.entry(v.clone()).or_default().push((0, main_len));
    }
    let mut next = main_len + 1;
    for (ci, factors) in chains.iter().enumerate() {
        let mut prev = 0;
        for (i, atom) in factors.iter().enumerate() {
            let cur = if i + 1 == factors.len() {
                main_len
            } else if ci == 0 {
                i + 1
            } else {
                next += 1;
                next - 1
            };
            for v in atom {
                let list = seeds.entry(v.clone()).or_default();
                if !list.contains(&(prev, cur)) {
                    list.push((prev, cur));
                }
            }
            prev = cur;
        }
    }
    Ok(GenericLayout { generators: next, main_len, seeds })
}

/// Outcome of a variety-level check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarietyVerdict {
    pub holds: bool,
    pub generators: usize,
    pub free_size: usize,
    /// The generic pair as terms over the generators.
    pub generic_pair: (String, String),
    pub lhs_size: usize,
    pub rhs_size: usize,
    /// On failure, the least pair of the free algebra in the left side but
    /// not the right, printed as terms.
    pub witness: Option<(String, String)>,
}

/// Builds the free algebra and the generic assignment for `stmt`.
pub fn generic_environment(a: &Algebra, stmt: &IdentityStatement) -> Result<(Arc<FreeAlgebra>, GenericLayout, Env)> {
    if stmt.mode != Mode::Inclusion {
        return Err(Error::UnsupportedShape("variety-level checks take inclusions only".into()));
    }
    let layout = generic_layout(&stmt.lhs)?;
    let f = free_algebra(a, layout.generators)?;
    let env = generic_env(&f, &layout, stmt)?;
    Ok((f, layout, env))
}

fn generic_env(f: &FreeAlgebra, layout: &GenericLayout, stmt: &IdentityStatement) -> Result<Env> {
    let size = f.len();
    let mut env = Env::new();
    for v in stmt.variables() {
        let role = *stmt.roles.get(&v).ok_or_else(|| Error::MissingRole(v.clone()))?;
        let pairs = layout.seeds.get(&v).cloned().unwrap_or_default();
        let rel = if role == Role::Congruence {
            f.merge_congruence(&pairs)?
        } else {
            let seed = BinRel::from_pairs(
                size,
                pairs.iter().map(|&(i, j)| (f.generator(i) as usize, f.generator(j) as usize)),
            )?;
            f.closure(role, &seed)?
        };
        env.insert(v, rel);
    }
    Ok(env)
}

fn check_roles(stmt: &IdentityStatement, congruences_only: bool) -> Result<()> {
    if congruences_only {
        if let Some((v, r)) = stmt.roles.iter().find(|(_, &r)| r != Role::Congruence) {
            return Err(Error::InvalidParameter(format!(
                "`{v}` is declared {r}; congruence checks need every variable to be a congruence"
            )));
        }
    }
    Ok(())
}

fn run(a: &Algebra, stmt: &IdentityStatement, n: usize, congruences_only: bool) -> Result<VarietyVerdict> {
    check_roles(stmt, congruences_only)?;
    let layout = generic_layout(&stmt.lhs)?;
    if layout.main_len != n {
        return Err(Error::InvalidParameter(format!(
            "the left-hand chain has length {}, not {n}",
            layout.main_len
        )));
    }
    let (f, layout, env) = generic_environment(a, stmt)?;
    let x0 = f.generator(0) as usize;
    let xe = f.generator(layout.end()) as usize;
    let f: &FreeAlgebra = &f;
    let lhs = eval_expr(f, &env, &stmt.lhs)?;
    if !lhs.contains(x0, xe) {
        return Err(Error::Internal("generic pair is missing from the left side".into()));
    }
    let rhs = eval_expr(f, &env, &stmt.rhs)?;
    let holds = rhs.contains(x0, xe);
    let full = compare(f, &env, stmt)?;
    if full.holds != holds {
        return Err(Error::Internal(format!(
            "generic pair verdict {holds} disagrees with the full comparison on the free algebra"
        )));
    }
    let show = |i: usize| f.witness(i as u32).to_string();
    Ok(VarietyVerdict {
        holds,
        generators: layout.generators,
        free_size: f.len(),
        generic_pair: (show(x0), show(xe)),
        lhs_size: lhs.len(),
        rhs_size: rhs.len(),
        witness: full.witness.map(|(p, q)| (show(p), show(q))),
    })
}

/// Decides a congruence identity for the variety generated by `a`; `n` is
/// the length of the first left-hand chain.
pub fn variety_congruence_check(a: &Algebra, stmt: &IdentityStatement, n: usize) -> Result<VarietyVerdict> {
    run(a, stmt, n, true)
}

/// As [`variety_congruence_check`], with tolerances and reflexive
/// admissible relations allowed.
pub fn variety_relation_check(a: &Algebra, stmt: &IdentityStatement, n: usize) -> Result<VarietyVerdict> {
    run(a, stmt, n, false)
}

/// Labels of a congruence generated by generator pairs, and alternation
/// searches on them. Works on free algebras beyond the relation size cap.
struct Labelled {
    labels: Vec<Vec<u32>>,
}

impl Labelled {
    fn class_step(&self, which: &[usize], from: &[bool]) -> Vec<bool> {
        use std::collections::HashSet;
        let key = |x: usize| which.iter().map(|&w| self.labels[w][x]).collect::<Vec<u32>>();
        let seen: HashSet<Vec<u32>> = (0..from.len()).filter(|&x| from[x]).map(key).collect();
        (0..from.len()).map(|x| from[x] || seen.contains(&key(x))).collect()
    }

    /// Least `k <= max_k` with `dst` reachable from `src` by `k` steps
    /// alternating between the meets `p` and `q`, starting with `p`.
    fn alternation(&self, p: &[usize], q: &[usize], src: usize, dst: usize, max_k: usize) -> Option<usize> {
        let size = self.labels[0].len();
        let mut cur = vec![false; size];
        cur[src] = true;
        if src == dst {
            return Some(0);
        }
        let mut stalled = 0;
        for k in 1..=max_k {
            let next = self.class_step(if k % 2 == 1 { p } else { q }, &cur);
            if next[dst] {
                return Some(k);
            }
            if next == cur {
                stalled += 1;
                if stalled >= 2 {
                    return None;
                }
            } else {
                stalled = 0;
            }
            cur = next;
        }
        None
    }
}

/// Result of a spectrum or modularity computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelReport {
    pub level: Option<usize>,
    pub free_size: usize,
    /// Whether the identity was also decided through the relation calculus
    /// at the level and one below it.
    pub cross_checked: bool,
}

/// Relations on free algebras beyond this size are only handled by labels.
const CROSS_CHECK_LIMIT: usize = 1024;

/// `meet(al, alt(be, ga, n)) <= alt(meet(al, be), meet(al, ga), k)`.
pub fn distributivity_statement(n: usize, k: usize) -> IdentityStatement {
    let stmt = format!("meet(al,alt(be,ga,{n})) <= alt(meet(al,be),meet(al,ga),{k})");
    IdentityStatement::parse(&stmt, "al:cong,be:cong,ga:cong").expect("well-formed")
}

/// `meet(al, comp(be, meet(al, ga), be)) <= alt(meet(al, be), meet(al, ga), m)`.
pub fn modularity_statement(m: usize) -> IdentityStatement {
    let stmt = format!("meet(al,comp(be,meet(al,ga),be)) <= alt(meet(al,be),meet(al,ga),{m})");
    IdentityStatement::parse(&stmt, "al:cong,be:cong,ga:cong").expect("well-formed")
}

fn level_of(
    a: &Algebra,
    statement: impl Fn(usize) -> IdentityStatement,
    max: usize,
    main_len: usize,
) -> Result<LevelReport> {
    let layout = generic_layout(&statement(1).lhs)?;
    let f = free_algebra(a, layout.generators)?;
    let labels = ["al", "be", "ga"]
        .iter()
        .map(|v| f.merge_labels(layout.seeds.get(*v).map_or(&[][..], Vec::as_slice)))
        .collect::<Result<Vec<_>>>()?;
    let lab = Labelled { labels };
    let x0 = f.generator(0) as usize;
    let xe = f.generator(main_len) as usize;
    let level = lab.alternation(&[0, 1], &[0, 2], x0, xe, max);
    let mut cross_checked = false;
    if f.len() <= CROSS_CHECK_LIMIT {
        let mut probes = Vec::new();
        match level {
            Some(k) => {
                probes.push((k, true));
                if k > 0 {
                    probes.push((k - 1, false));
                }
            }
            None => probes.push((max, false)),
        }
        for (k, expect) in probes {
            let v = variety_congruence_check(a, &statement(k), main_len)?;
            if v.holds != expect {
                return Err(Error::Internal(format!(
                    "label search and relation calculus disagree at length {k}"
                )));
            }
        }
        cross_checked = true;
    }
    Ok(LevelReport { level, free_size: f.len(), cross_checked })
}

/// Least `k <= max_k` with `al(be o_n ga) <= al be o_k al ga` throughout the
/// variety generated by `a`.
pub fn spectrum(a: &Algebra, n: usize, max_k: usize) -> Result<LevelReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("chain length must be at least 1".into()));
    }
    level_of(a, |k| distributivity_statement(n, k), max_k, n)
}

/// Least `m <= max_m` for which the Day identity holds in the variety.
pub fn modularity_level(a: &Algebra, max_m: usize) -> Result<LevelReport> {
    level_of(a, modularity_statement, max_m, 3)
}

/// Term form of the generic pair, for reports.
pub fn generic_terms(f: &FreeAlgebra, layout: &GenericLayout) -> (Term, Term) {
    (f.witness(f.generator(0)), f.witness(f.generator(layout.end())))
}
