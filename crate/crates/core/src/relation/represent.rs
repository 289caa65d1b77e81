//! Obstructions to writing a tolerance as `R o R^-1` with `R` reflexive and
//! admissible.

use serde::Serialize;

use crate::algebra::Algebra;
use crate::baker::{BakerInstance, Signature};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::binrel::BinRel;
use crate::relation::closure::Structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representability {
    /// The witness pairs are present but their forced consequence is not.
    NonRepresentableByWitness,
    Inconclusive,
}

/// On a `b` instance, every `R o R^-1` containing `(c0, c1)` and
/// `(c(n-1), cn)` also contains `(e(n-1), f1)`. A relation with the first
/// two pairs and without the third is therefore not of that form.
pub fn representability_obstruction(inst: &BakerInstance, theta: &BinRel) -> Result<Representability> {
    if inst.signature != Signature::B {
        return Err(Error::InvalidParameter("the obstruction is stated for signature b".into()));
    }
    if theta.size() != inst.size() {
        return Err(Error::SizeMismatch(theta.size(), inst.size()));
    }
    let n = inst.n;
    let c = |i: usize| inst.c[i] as usize;
    let has = |a: usize, b: usize| theta.contains(a, b);
    if has(c(0), c(1)) && has(c(n - 1), c(n)) && !has(inst.e[n - 1] as usize, inst.f[1] as usize) {
        Ok(Representability::NonRepresentableByWitness)
    } else {
        Ok(Representability::Inconclusive)
    }
}

/// `R o R^-1`
pub fn symmetric_square(r: &BinRel) -> BinRel {
    r.compose(&r.converse()).expect("same size")
}

/// Searches admissible closures of subsets of `theta` with at most
/// `max_seed` off-diagonal pairs for an `R` with `R o R^-1 = theta`.
/// Exponential; meant for small cases only.
pub fn representation_search(a: &Algebra, theta: &BinRel, max_seed: usize, limits: Limits) -> Result<Option<BinRel>> {
    let pairs: Vec<(usize, usize)> = theta.pairs().filter(|(x, y)| x != y).collect();
    let mut budget = limits.max_work;
    let mut chosen: Vec<usize> = Vec::new();
    fn walk(
        a: &Algebra,
        theta: &BinRel,
        pairs: &[(usize, usize)],
        start: usize,
        chosen: &mut Vec<usize>,
        max_seed: usize,
        budget: &mut u64,
    ) -> Result<Option<BinRel>> {
        if *budget == 0 {
            return Err(Error::Resource("representation search budget exhausted".into()));
        }
        *budget -= 1;
        let seed = BinRel::from_pairs(theta.size(), chosen.iter().map(|&i| pairs[i]))?;
        let r = a.admissible_closure(&seed)?;
        let sq = symmetric_square(&r);
        if sq == *theta {
            return Ok(Some(r));
        }
        // only supersets of a seed whose square stays inside theta can help
        if !sq.is_subset(theta) || chosen.len() == max_seed {
            return Ok(None);
        }
        for i in start..pairs.len() {
            chosen.push(i);
            let found = walk(a, theta, pairs, i + 1, chosen, max_seed, budget)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    walk(a, theta, &pairs, 0, &mut chosen, max_seed, &mut budget)
}
