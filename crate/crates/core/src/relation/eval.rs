//! Evaluation of relation expressions, inclusion checks and alternation
//! searches.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::relation::binrel::BinRel;
use crate::relation::closure::{check_role, Structure};
use crate::relation::expr::{Mode, RelExpr};
use crate::relation::IdentityStatement;

/// Values for relation variables.
pub type Env = BTreeMap<String, BinRel>;

pub fn eval_expr<S: Structure + ?Sized>(s: &S, env: &Env, e: &RelExpr) -> Result<BinRel> {
    let n = s.size();
    let lookup = |v: &str| -> Result<BinRel> {
        let r = env.get(v).ok_or_else(|| Error::Unbound(v.to_string()))?;
        if r.size() != n {
            return Err(Error::SizeMismatch(r.size(), n));
        }
        Ok(r.clone())
    };
    Ok(match e {
        RelExpr::Var(v) => lookup(v)?,
        RelExpr::Diag => BinRel::diagonal(n),
        RelExpr::Comp(xs) => {
            let mut acc = BinRel::diagonal(n);
            for x in xs {
                acc = acc.compose(&eval_expr(s, env, x)?)?;
            }
            acc
        }
        RelExpr::Meet(xs) => {
            let mut acc = BinRel::full(n);
            for x in xs {
                acc = acc.meet(&eval_expr(s, env, x)?)?;
            }
            acc
        }
        RelExpr::Alt(a, b, k) => {
            if *k == 0 {
                // still resolve variables so unbound names are reported
                eval_expr(s, env, a)?;
                eval_expr(s, env, b)?;
                return Ok(BinRel::diagonal(n));
            }
            let ra = eval_expr(s, env, a)?;
            let rb = if *k > 1 { eval_expr(s, env, b)? } else { ra.clone() };
            ra.compose_alt(&rb, *k)?
        }
        RelExpr::Pow(a, k) => {
            let ra = eval_expr(s, env, a)?;
            ra.compose_alt(&ra, *k)?
        }
        RelExpr::Conv(a) => eval_expr(s, env, a)?.converse(),
        RelExpr::Tc(a) => eval_expr(s, env, a)?.transitive_closure(),
        RelExpr::Adm(a, b) => {
            let u = eval_expr(s, env, a)?.union_raw(&eval_expr(s, env, b)?)?;
            s.admissible_closure(&u)?
        }
    })
}

/// Result of an inclusion or equality check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionVerdict {
    pub holds: bool,
    /// Least pair in `lhs \ rhs` (or `rhs \ lhs` when `reversed`).
    pub witness: Option<(usize, usize)>,
    pub reversed: bool,
    pub lhs_size: usize,
    pub rhs_size: usize,
}

/// Verifies that every variable's value has its declared role.
pub fn enforce_roles<S: Structure + ?Sized + Sized>(
    s: &S,
    env: &Env,
    stmt: &IdentityStatement,
) -> Result<()> {
    for v in stmt.variables() {
        let role = *stmt.roles.get(&v).ok_or_else(|| Error::MissingRole(v.clone()))?;
        let r = env.get(&v).ok_or_else(|| Error::Unbound(v.clone()))?;
        if r.size() != s.size() {
            return Err(Error::SizeMismatch(r.size(), s.size()));
        }
        let check = check_role(s, r, role)?;
        if let Some(c) = check.counterexample {
            return Err(Error::RoleViolation {
                var: v,
                role: role.to_string(),
                reason: c.to_string(),
            });
        }
    }
    Ok(())
}

/// Evaluates both sides without re-checking roles.
pub(crate) fn compare<S: Structure>(s: &S, env: &Env, stmt: &IdentityStatement) -> Result<InclusionVerdict> {
    let lhs = eval_expr(s, env, &stmt.lhs)?;
    let rhs = eval_expr(s, env, &stmt.rhs)?;
    let mut verdict = InclusionVerdict {
        holds: true,
        witness: None,
        reversed: false,
        lhs_size: lhs.len(),
        rhs_size: rhs.len(),
    };
    if let Some(w) = lhs.first_missing(&rhs) {
        verdict.holds = false;
        verdict.witness = Some(w);
    } else if stmt.mode == Mode::Equality {
        if let Some(w) = rhs.first_missing(&lhs) {
            verdict.holds = false;
            verdict.witness = Some(w);
            verdict.reversed = true;
        }
    }
    Ok(verdict)
}

/// Checks `stmt` for the relations in `env`, after enforcing declared roles.
pub fn check_inclusion<S: Structure>(s: &S, env: &Env, stmt: &IdentityStatement) -> Result<InclusionVerdict> {
    enforce_roles(s, env, stmt)?;
    compare(s, env, stmt)
}

/// Least alternation lengths for each start order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alternation {
    pub start_p: Option<usize>,
    pub start_q: Option<usize>,
}

fn set_with(size: usize, x: usize) -> Vec<u64> {
    let mut v = vec![0u64; size.div_ceil(64).max(1)];
    v[x / 64] |= 1 << (x % 64);
    v
}

fn has(set: &[u64], x: usize) -> bool {
    set[x / 64] >> (x % 64) & 1 == 1
}

fn one_order(first: &BinRel, second: &BinRel, src: usize, dst: usize, max_k: usize) -> Option<usize> {
    if src == dst {
        return Some(0);
    }
    let mut reach = set_with(first.size(), src);
    let mut stalled = 0;
    for k in 1..=max_k {
        let rel = if k % 2 == 1 { first } else { second };
        let next = rel.image_of(&reach);
        if has(&next, dst) {
            return Some(k);
        }
        if next == reach {
            stalled += 1;
            if stalled >= 2 {
                return None;
            }
        } else {
            stalled = 0;
        }
        reach = next;
    }
    None
}

/// Least `k <= max_k` with `(src, dst)` in the `k`-fold alternation of `p`
/// and `q`, for both start orders. Both relations must be reflexive.
pub fn min_alternation(p: &BinRel, q: &BinRel, src: usize, dst: usize, max_k: usize) -> Result<Alternation> {
    if p.size() != q.size() {
        return Err(Error::SizeMismatch(p.size(), q.size()));
    }
    if src >= p.size() || dst >= p.size() {
        return Err(Error::OutOfRange { value: src.max(dst), size: p.size() });
    }
    if !p.is_reflexive() || !q.is_reflexive() {
        return Err(Error::InvalidParameter("alternation search needs reflexive relations".into()));
    }
    Ok(Alternation {
        start_p: one_order(p, q, src, dst, max_k),
        start_q: one_order(q, p, src, dst, max_k),
    })
}

/// Lexicographically least chain `src = z0, z1, .., zk = dst` whose links
/// alternate between `first` and `second`, or `None`.
pub fn alternation_chain(
    first: &BinRel,
    second: &BinRel,
    src: usize,
    dst: usize,
    k: usize,
) -> Result<Option<Vec<usize>>> {
    if first.size() != second.size() {
        return Err(Error::SizeMismatch(first.size(), second.size()));
    }
    let n = first.size();
    if src >= n || dst >= n {
        return Err(Error::OutOfRange { value: src.max(dst), size: n });
    }
    let link = |j: usize| if j % 2 == 0 { first } else { second };
    // back[j]: elements from which dst is reachable using links j..k
    let mut back = vec![Vec::new(); k + 1];
    back[k] = set_with(n, dst);
    for j in (0..k).rev() {
        back[j] = link(j).converse().image_of(&back[j + 1]);
    }
    if !has(&back[0], src) {
        return Ok(None);
    }
    let mut chain = vec![src];
    let mut cur = src;
    for j in 0..k {
        cur = link(j)
            .successors(cur)
            .find(|&y| has(&back[j + 1], y))
            .expect("backward sets guarantee a successor");
        chain.push(cur);
    }
    Ok(Some(chain))
}
