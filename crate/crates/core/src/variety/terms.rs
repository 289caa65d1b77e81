//! Searches of a clone level for terms satisfying Maltsev-type equations.
//!
//! Equations are tested on the base algebra only; identities that hold
//! there hold in the whole variety it generates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Term};
use crate::error::{Error, Result};
use crate::variety::free::{free_algebra, FreeAlgebra};

/// Largest clone level searched.
pub const MAX_SEARCH_ARITY: usize = 5;

/// Kinds of terms the search knows the defining equations of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermSearchKind {
    Majority,
    Nu { arity: usize },
    Edge { k: usize },
    Maltsev,
    BakerB,
    /// A term with no coordinate forcing `bottom`.
    ProjectionAbsorption { bottom: u32, arity: usize },
}

impl TermSearchKind {
    pub fn arity(&self) -> usize {
        match *self {
            TermSearchKind::Majority | TermSearchKind::Maltsev | TermSearchKind::BakerB => 3,
            TermSearchKind::Nu { arity } => arity,
            TermSearchKind::Edge { k } => k + 1,
            TermSearchKind::ProjectionAbsorption { arity, .. } => arity,
        }
    }

    /// Parses a kind name with an optional arity parameter, as taken on the
    /// command line.
    pub fn parse(name: &str, arity: Option<usize>) -> Result<Self> {
        let need = |what: &str| {
            arity.ok_or_else(|| Error::InvalidParameter(format!("`{what}` needs an arity")))
        };
        let kind = match name {
            "majority" => TermSearchKind::Majority,
            "maltsev" => TermSearchKind::Maltsev,
            "baker_b" | "baker-b" | "baker" => TermSearchKind::BakerB,
            "nu" => TermSearchKind::Nu { arity: need("nu")? },
            "edge" => TermSearchKind::Edge { k: need("edge")? },
            "absorption" | "projection_absorption" => {
                TermSearchKind::ProjectionAbsorption { bottom: 0, arity: need("absorption")? }
            }
            _ => return Err(Error::InvalidParameter(format!("unknown term kind `{name}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TermSearchKind::Nu { arity } if arity < 3 => {
                Err(Error::InvalidParameter("near-unanimity terms need arity at least 3".into()))
            }
            TermSearchKind::Edge { k } if k < 2 => {
                Err(Error::InvalidParameter("edge terms need k at least 2".into()))
            }
            TermSearchKind::ProjectionAbsorption { arity: 0, .. } => {
                Err(Error::InvalidParameter("arity must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// The defining equations, if the kind is equational.
    pub fn equations(&self) -> Vec<Equation> {
        let x = 0;
        let y = 1;
        let eq = |lhs: Vec<usize>, rhs: Side| Equation { vars: 2, lhs, rhs };
        match *self {
            TermSearchKind::Majority => TermSearchKind::Nu { arity: 3 }.equations(),
            TermSearchKind::Nu { arity } => (0..arity)
                .map(|i| eq((0..arity).map(|j| if j == i { y } else { x }).collect(), Side::Var(x)))
                .collect(),
            TermSearchKind::Edge { k } => {
                let r = k + 1;
                let mut out = Vec::new();
                let mut first = vec![x; r];
                first[0] = y;
                first[1] = y;
                out.push(eq(first, Side::Var(x)));
                let mut second = vec![x; r];
                second[1] = y;
                second[2] = y;
                out.push(eq(second, Side::Var(x)));
                for i in 3..r {
                    let mut e = vec![x; r];
                    e[i] = y;
                    out.push(eq(e, Side::Var(x)));
                }
                out
            }
            TermSearchKind::Maltsev => vec![eq(vec![x, y, y], Side::Var(x)), eq(vec![x, x, y], Side::Var(y))],
            TermSearchKind::BakerB => vec![
                eq(vec![x, x, y], Side::Var(x)),
                eq(vec![x, y, x], Side::Var(x)),
                eq(vec![x, y, y], Side::Pattern(vec![y, x, x])),
            ],
            TermSearchKind::ProjectionAbsorption { .. } => Vec::new(),
        }
    }
}

impl fmt::Display for TermSearchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermSearchKind::Majority => write!(f, "majority"),
            TermSearchKind::Nu { arity } => write!(f, "nu({arity})"),
            TermSearchKind::Edge { k } => write!(f, "edge({k})"),
            TermSearchKind::Maltsev => write!(f, "maltsev"),
            TermSearchKind::BakerB => write!(f, "baker_b"),
            TermSearchKind::ProjectionAbsorption { bottom, arity } => {
                write!(f, "absorption(bottom={bottom}, arity={arity})")
            }
        }
    }
}

impl FromStr for TermSearchKind {
    type Err = Error;
    /// `majority`, `maltsev`, `baker_b`, or `nu:4`, `edge:4`, `absorption:3`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, k)) => {
                let k = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad arity in `{s}`")))?;
                TermSearchKind::parse(name.trim(), Some(k))
            }
            None => TermSearchKind::parse(s.trim(), None),
        }
    }
}

/// Right side of an equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Side {
    Var(usize),
    /// The searched term applied to this variable pattern.
    Pattern(Vec<usize>),
}

/// `t(lhs) = rhs` over `vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub vars: usize,
    pub lhs: Vec<usize>,
    pub rhs: Side,
}

impl Equation {
    /// Whether the operation with value vector `f` (over `size^arity`
    /// points) satisfies the equation everywhere.
    pub fn holds(&self, f: &[u32], size: usize) -> bool {
        let index = |pattern: &[usize], assign: &[u32]| {
            pattern.iter().fold(0usize, |acc, &v| acc * size + assign[v] as usize)
        };
        let mut assign = vec![0u32; self.vars];
        loop {
            let left = f[index(&self.lhs, &assign)];
            let right = match &self.rhs {
                Side::Var(v) => assign[*v],
                Side::Pattern(p) => f[index(p, &assign)],
            };
            if left != right {
                return false;
            }
            let mut i = self.vars;
            loop {
                if i == 0 {
                    return true;
                }
                i -= 1;
                assign[i] += 1;
                if (assign[i] as usize) < size {
                    break;
                }
                assign[i] = 0;
            }
        }
    }
}

/// A found term with its operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermWitness {
    pub term: Term,
    pub arity: usize,
    pub values: Vec<u32>,
}

fn clone_level(a: &Algebra, arity: usize) -> Result<std::sync::Arc<FreeAlgebra>> {
    if arity > MAX_SEARCH_ARITY {
        return Err(Error::Resource(format!(
            "clone searches are limited to arity {MAX_SEARCH_ARITY}, got {arity}"
        )));
    }
    free_algebra(a, arity)
}

/// Whether coordinate `i` forces `bottom`: `f = bottom` whenever argument `i` is.
fn absorbs(f: &[u32], size: usize, arity: usize, i: usize, bottom: u32) -> bool {
    let stride = size.pow((arity - 1 - i) as u32);
    f.iter()
        .enumerate()
        .all(|(p, &v)| (p / stride) % size != bottom as usize || v == bottom)
}

fn satisfies(kind: &TermSearchKind, eqs: &[Equation], f: &[u32], size: usize) -> bool {
    match *kind {
        TermSearchKind::ProjectionAbsorption { bottom, arity } => {
            (0..arity).all(|i| !absorbs(f, size, arity, i, bottom))
        }
        _ => eqs.iter().all(|e| e.holds(f, size)),
    }
}

/// First member of the clone level of `kind`, in generation order,
/// satisfying its equations.
pub fn find_term(a: &Algebra, kind: TermSearchKind) -> Result<Option<TermWitness>> {
    kind.validate()?;
    if let TermSearchKind::ProjectionAbsorption { bottom, .. } = kind {
        if bottom as usize >= a.size {
            return Err(Error::OutOfRange { value: bottom as usize, size: a.size });
        }
    }
    let arity = kind.arity();
    let f = clone_level(a, arity)?;
    let eqs = kind.equations();
    let found = (0..f.len() as u32)
        .into_par_iter()
        .position_first(|i| satisfies(&kind, &eqs, f.element(i), a.size));
    Ok(found.map(|i| {
        let i = i as u32;
        TermWitness { term: f.witness(i), arity, values: f.element(i).to_vec() }
    }))
}

/// Whether every `arity`-ary term operation has a coordinate forcing
/// `bottom`. A true verdict rules out near-unanimity terms of that arity.
pub fn absorption_check(a: &Algebra, bottom: u32, arity: usize) -> Result<bool> {
    Ok(find_term(a, TermSearchKind::ProjectionAbsorption { bottom, arity })?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Operation;
    use crate::lattice::{c2b, c2lat, c2median, c2u, LatticeTerm, ReductSpec};

    fn found(a: &Algebra, kind: TermSearchKind) -> bool {
        find_term(a, kind).unwrap().is_some()
    }

    #[test]
    fn searches_on_two_element_generators() {
        let u = find_term(&c2u(), TermSearchKind::Nu { arity: 4 }).unwrap().unwrap();
        assert_eq!(u.term.to_string(), "u(x,y,z,w)");
        let b = c2b();
        for kind in [
            TermSearchKind::Majority,
            TermSearchKind::Nu { arity: 4 },
            TermSearchKind::Nu { arity: 5 },
            TermSearchKind::Maltsev,
        ] {
            assert!(!found(&b, kind), "{kind}");
        }
        let t = find_term(&b, TermSearchKind::BakerB).unwrap().unwrap();
        assert_eq!(ReductSpec::baker().expand(&t.term).unwrap().to_string(), "x(y+z)");
        let m = find_term(&c2lat(), TermSearchKind::Majority).unwrap().unwrap();
        assert_eq!(m.values, c2median().operations[0].table);
    }

    #[test]
    fn dumb_variable_turns_nu_into_edge() {
        // u(x0, x2, x3, x4)
        let spec = ReductSpec::new(vec![(
            "t",
            5,
            LatticeTerm::nu4().substitute(&[0, 2, 3, 4].map(LatticeTerm::var)),
        )])
        .unwrap();
        let t = crate::lattice::two_element_reduct(&spec).unwrap();
        for e in (TermSearchKind::Edge { k: 4 }).equations() {
            assert!(e.holds(&t.operations[0].table, 2));
        }
        assert!(found(&c2lat(), TermSearchKind::Edge { k: 3 }));
        assert!(!found(&c2b(), TermSearchKind::Edge { k: 3 }));
    }

    #[test]
    fn absorption() {
        for k in 2..=5 {
            assert!(absorption_check(&c2b(), 0, k).unwrap(), "k={k}");
        }
        assert!(!absorption_check(&c2u(), 0, 4).unwrap());
        // arity 1: the identity is the only unary term and it fixes bottom
        assert!(absorption_check(&c2b(), 0, 1).unwrap());
        assert!(find_term(&c2b(), TermSearchKind::Nu { arity: 6 }).unwrap_err().is_resource());
    }

    #[test]
    fn verdicts_ignore_operation_order() {
        let xor = Operation::from_fn("p", 2, 3, |a| a[0] ^ a[1] ^ a[2]).unwrap();
        let maj = c2median().operations[0].clone();
        let one = Algebra::new("a", 2, vec![xor.clone(), maj.clone()]).unwrap();
        let two = Algebra::new("a", 2, vec![maj, xor]).unwrap();
        for kind in [TermSearchKind::Majority, TermSearchKind::Maltsev, TermSearchKind::BakerB] {
            assert_eq!(found(&one, kind), found(&two, kind), "{kind}");
        }
        assert!(found(&one, TermSearchKind::Maltsev));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("nu:4".parse::<TermSearchKind>().unwrap(), TermSearchKind::Nu { arity: 4 });
        assert_eq!(TermSearchKind::parse("edge", Some(4)).unwrap().arity(), 5);
        assert!("nu".parse::<TermSearchKind>().is_err());
        assert!("nu:2".parse::<TermSearchKind>().is_err());
        assert!("cube".parse::<TermSearchKind>().is_err());
    }
}
