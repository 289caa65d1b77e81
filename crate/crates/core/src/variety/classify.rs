//! Term-based classification of two-element lattice reducts and the
//! arithmeticity probe.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::lattice::{two_element_reduct, ReductSpec};
use crate::relation::eval::{eval_expr, Env};
use crate::relation::{all_congruences, BinRel, RelExpr};
use crate::variety::check::modularity_level;
use crate::variety::terms::{find_term, TermSearchKind, TermWitness};

/// Largest Day-identity length tried by the classification.
pub const CLASSIFY_MAX_LEVEL: usize = 12;

/// Findings for one reduct of the two-element lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub operations: Vec<String>,
    pub majority: Option<String>,
    pub maltsev: Option<String>,
    pub baker_b: Option<String>,
    /// Least near-unanimity arity found among 3 and 4, with its term.
    pub near_unanimity: Option<(usize, String)>,
    pub modularity_level: Option<usize>,
    /// False only if the variety is modular within the bound and none of
    /// majority, Maltsev or Baker terms was found.
    pub consistent: bool,
}

fn show(spec: &ReductSpec, w: Option<TermWitness>) -> Option<String> {
    w.map(|w| match spec.expand(&w.term) {
        Ok(l) => format!("{} = {}", w.term, l),
        Err(_) => w.term.to_string(),
    })
}

pub fn classify_boolean_reduct(spec: &ReductSpec) -> Result<ClassificationReport> {
    if spec.ops.iter().any(|o| o.arity > crate::variety::terms::MAX_SEARCH_ARITY + 1) {
        return Err(Error::Resource("reduct terms are limited to 6 variables".into()));
    }
    let a = two_element_reduct(spec)?;
    let majority = show(spec, find_term(&a, TermSearchKind::Majority)?);
    let maltsev = show(spec, find_term(&a, TermSearchKind::Maltsev)?);
    let baker_b = show(spec, find_term(&a, TermSearchKind::BakerB)?);
    let mut near_unanimity = None;
    for arity in 3..=4 {
        if let Some(t) = show(spec, find_term(&a, TermSearchKind::Nu { arity })?) {
            near_unanimity = Some((arity, t));
            break;
        }
    }
    let level = modularity_level(&a, CLASSIFY_MAX_LEVEL)?.level;
    let consistent = level.is_none() || majority.is_some() || maltsev.is_some() || baker_b.is_some();
    Ok(ClassificationReport {
        operations: spec.ops.iter().map(|o| format!("{} = {}", o.name, o.term)).collect(),
        majority,
        maltsev,
        baker_b,
        near_unanimity,
        modularity_level: level,
        consistent,
    })
}

/// `meet(comp(al, de), comp(be, ga))` and the four-factor right side.
pub fn arithmetic_sides() -> (RelExpr, RelExpr) {
    let lhs = crate::relation::parse_expr("meet(comp(al,de),comp(be,ga))").expect("well-formed");
    let rhs = crate::relation::parse_expr("comp(meet(al,be),meet(al,ga),meet(de,be),meet(de,ga))")
        .expect("well-formed");
    (lhs, rhs)
}

/// First quadruple `(al, de, be, ga)` of indices into `congruences` for
/// which the two sides differ, in lexicographic order.
pub fn arithmetic_violation(a: &Algebra, congruences: &[BinRel]) -> Result<Option<[usize; 4]>> {
    let (lhs, rhs) = arithmetic_sides();
    let m = congruences.len();
    let total = m.pow(4);
    let hit = (0..total).into_par_iter().map(|q| -> Result<bool> {
        let idx = [q / (m * m * m), (q / (m * m)) % m, (q / m) % m, q % m];
        let env: Env = ["al", "de", "be", "ga"]
            .iter()
            .zip(idx)
            .map(|(v, i)| (v.to_string(), congruences[i].clone()))
            .collect();
        Ok(eval_expr(a, &env, &lhs)? != eval_expr(a, &env, &rhs)?)
    });
    let results: Vec<bool> = hit.collect::<Result<Vec<_>>>()?;
    Ok(results
        .iter()
        .position(|&b| b)
        .map(|q| [q / (m * m * m), (q / (m * m)) % m, (q / m) % m, q % m]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArithmeticityReport {
    pub majority: Option<String>,
    pub maltsev: Option<String>,
    pub congruences: usize,
    pub quadruples: usize,
    /// First violating quadruple, as congruence indices.
    pub violation: Option<[usize; 4]>,
    /// Term side (both terms found) agrees with the instance side.
    pub agreement: bool,
}

/// Compares the term-side verdict with a sweep of all congruence
/// quadruples of `a`.
pub fn arithmeticity_probe(a: &Algebra) -> Result<ArithmeticityReport> {
    let majority = find_term(a, TermSearchKind::Majority)?.map(|w| w.term.to_string());
    let maltsev = find_term(a, TermSearchKind::Maltsev)?.map(|w| w.term.to_string());
    let cons = all_congruences(a)?;
    let violation = arithmetic_violation(a, &cons)?;
    let terms = majority.is_some() && maltsev.is_some();
    // a violation refutes arithmeticity; its absence on one algebra does
    // not prove it, so only the first direction is required to agree
    let agreement = if terms { violation.is_none() } else { true };
    Ok(ArithmeticityReport {
        majority,
        maltsev,
        congruences: cons.len(),
        quadruples: cons.len().pow(4),
        violation,
        agreement,
    })
}

/// Principal congruences of `a`, deduplicated, in order of first pair.
pub fn principal_congruences(a: &Algebra) -> Result<Vec<BinRel>> {
    use crate::relation::Structure;
    let mut out: Vec<BinRel> = vec![BinRel::diagonal(a.size)];
    for x in 0..a.size {
        for y in x + 1..a.size {
            let c = a.congruence_closure(&BinRel::from_pairs(a.size, [(x, y)])?)?;
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{direct_product, Operation};
    use crate::lattice::c2median;

    fn arithmetical() -> Algebra {
        let xor = Operation::from_fn("p", 2, 3, |a| a[0] ^ a[1] ^ a[2]).unwrap();
        let mut ops = c2median().operations;
        ops.push(xor);
        Algebra::new("c2mp", 2, ops).unwrap()
    }

    #[test]
    fn classification_of_small_reducts() {
        let b = classify_boolean_reduct(&ReductSpec::baker()).unwrap();
        assert!(b.baker_b.is_some() && b.majority.is_none() && b.maltsev.is_none());
        assert_eq!(b.modularity_level, Some(5));
        assert!(b.consistent);
        let m = classify_boolean_reduct(&ReductSpec::median()).unwrap();
        assert!(m.majority.is_some());
        let s = classify_boolean_reduct(&ReductSpec::meet_only()).unwrap();
        assert_eq!(s.modularity_level, None);
        assert!(s.majority.is_none() && s.maltsev.is_none() && s.baker_b.is_none());
        let u = classify_boolean_reduct(&ReductSpec::nu4()).unwrap();
        assert_eq!(u.near_unanimity.as_ref().map(|x| x.0), Some(4));
        assert!(u.majority.is_none());
    }

    #[test]
    fn arithmetical_algebras_pass_the_sweep() {
        let a = arithmetical();
        let r = arithmeticity_probe(&a).unwrap();
        assert!(r.majority.is_some() && r.maltsev.is_some());
        assert_eq!(r.violation, None);
        assert!(r.agreement);
        let sq = direct_product(&[a.clone(), a]).unwrap();
        let r = arithmeticity_probe(&sq).unwrap();
        assert_eq!(r.violation, None);
        assert!(r.congruences >= 4);
    }
}
